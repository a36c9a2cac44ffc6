use std::f64::consts::PI;

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::gk;

/// Error attributed to [`volume_closed_form_n3`] values.
pub(crate) const CLOSED_FORM_ERROR: f64 = 1e-12;

/// `A_3(a) = int_{-1}^{1} min{(a1^2 + a2^2 + 2 a1 a2 x)^-1, a3^-2} (2/pi) sqrt(1 - x^2) dx`.
///
/// Integrated in `x = cos(phi)`, where the weight becomes `sin^2(phi)` and the
/// crossover `phi*` of the two branches is a panel boundary.
pub fn volume_closed_form_n3(a: &Direction) -> Result<f64> {
    if a.n() != 3 {
        return Err(Error::DimensionMismatch {
            expected: "3".into(),
            got: a.n(),
        });
    }
    let w = a.weights();
    let (a1, a2, a3) = (w[0], w[1], w[2]);
    if a2 == 0.0 {
        return Ok(1.0);
    }
    let p = a1 * a1 + a2 * a2;
    let q = 2.0 * a1 * a2;
    let gap = (a1 - a2) * (a1 - a2);
    let cap = if a3 > 0.0 { 1.0 / (a3 * a3) } else { f64::INFINITY };
    let x_star = (a3 * a3 - p) / q;
    let phi_star = if x_star <= -1.0 { PI } else { x_star.min(1.0).acos() };

    let tol = 1e-14;
    let free = gk::integrate(
        |phi: f64| {
            // p + q cos(phi) = (a1 - a2)^2 + 2 q cos^2(phi/2), free of cancellation near pi.
            let (s, c) = (0.5 * phi).sin_cos();
            4.0 * s * s * c * c / (gap + 2.0 * q * c * c)
        },
        0.0,
        phi_star,
        tol,
        2000,
    );
    let mut total = free.value;
    if phi_star < PI {
        let capped = gk::integrate(
            |phi: f64| {
                let s = phi.sin();
                cap * s * s
            },
            phi_star,
            PI,
            tol,
            2000,
        );
        total += capped.value;
    }
    Ok(2.0 / PI * total)
}
