//! `Psi(s) = (s/4) int_0^inf |2 J1(t) / t|^s t dt`, finite for `s > 4/3`.
//!
//! Panels run between consecutive zeros of `J1`. The tail beyond a zero `T` is
//! handled by whichever bound first meets `abs_tol / 2`:
//!
//! * the envelope `|k(t)| <= C_ENV t^{-3/2}`, tail value 0;
//! * for `T >= AVERAGE_MIN`, the modulus-phase form `J1 = M cos(theta)`. Writing
//!   the integrand as `h(u) |cos u|^s` in `u = theta(t)`, the tail is
//!   `m_s int h du` plus `int h g du` with `g = |cos u|^s - m_s`. Started at a
//!   zero, the first primitive of `g` also has zero mean over a period and the
//!   second primitive is at most `pi^2/8`, so two integrations by parts bound the
//!   oscillatory part by `(pi^2/8) |h'(T)|` for convex decreasing `h`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gk;
use crate::special::{kernel, ZeroTable, C_ENV};
use crate::volume::QuadratureConfig;

/// Smallest exponent accepted; the tail exponent `2 - 3s/2` vanishes at `4/3`.
pub const PSI_MIN_S: f64 = 1.4;
/// Smallest truncation point for the modulus-phase tail.
const AVERAGE_MIN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub s: f64,
    pub value: f64,
    pub error: f64,
}

/// Mean of `|cos u|^s` over a period.
fn cos_power_mean(s: f64) -> f64 {
    (ln_gamma(0.5 * (s + 1.0)) - 0.5 * PI.ln() - ln_gamma(0.5 * s + 1.0)).exp()
}

/// Tail of `int |k(t)|^s t dt` beyond `t0`: `(estimate, bound on its error)`.
///
/// Powers are formed in log space; `2^s` alone overflows for large `s`.
fn averaged_tail(s: f64, t0: f64) -> (f64, f64) {
    // t M(t)^2 = (2/pi)(1 + 3/(8t^2) - 45/(128t^4) + ...), raised to s/2.
    let b1 = 3.0 * s / 16.0;
    let b2 = -45.0 * s / 256.0 + 9.0 * s * (s - 2.0) / 512.0;
    let q = 2.0 - 1.5 * s;
    let lt = t0.ln();
    let ln_amp = s * 2f64.ln() + 0.5 * s * (2.0 / PI).ln() + cos_power_mean(s).ln();
    let lead = (ln_amp + q * lt - (-q).ln()).exp();
    let series = 1.0 + b1 * (-q) / (2.0 - q) / (t0 * t0) + b2 * (-q) / (4.0 - q) / t0.powi(4);
    let series_rem = (s + s * s + s * s * s) * (-q) / (6.0 - q) / t0.powi(6);
    let m2_bound = 2.0 / (PI * t0) * (1.0 + 1.0 / (t0 * t0));
    let ln_h = s * 2f64.ln() + 0.5 * (s + 2.0) * m2_bound.ln() + (2.0 - s) * lt + (0.5 * PI).ln();
    // |dh/du| <= (3s/2 - 1 + 1/T) h / T, with dt/du = pi t M^2 / 2 <= 1 + 1/T^2.
    let dh = (1.5 * s - 1.0 + 1.0 / t0) * (1.0 + 1.0 / (t0 * t0)) * ln_h.exp() / t0;
    (lead * series, PI * PI / 8.0 * dh + lead * series_rem)
}

/// `int_T^inf (C_ENV t^{-3/2})^s t dt`.
fn envelope_tail(s: f64, t0: f64) -> f64 {
    (s * C_ENV.ln() + (2.0 - 1.5 * s) * t0.ln() - (1.5 * s - 2.0).ln()).exp()
}

/// `|k(t)|^s`, through `ln(1 + (k - 1))` with `k - 1` summed directly for
/// small `t`, so that huge `s` does not amplify the rounding of `k` near 1.
fn kernel_pow(t: f64, s: f64) -> f64 {
    if t >= 1.0 {
        return kernel(t).abs().powf(s);
    }
    let q = -0.25 * t * t;
    let mut term = 1.0;
    let mut km1 = 0.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        km1 += term;
        if term.abs() <= 1e-17 * km1.abs() || term == 0.0 {
            break;
        }
    }
    (s * km1.ln_1p()).exp()
}

pub fn psi(s: f64, cfg: &QuadratureConfig) -> Result<PsiValue> {
    if !s.is_finite() || s <= 4.0 / 3.0 {
        return Err(Error::Domain(format!("Psi(s) is infinite for s <= 4/3, got s = {s}")));
    }
    if s < PSI_MIN_S {
        return Err(Error::SlowConvergence { s, min: PSI_MIN_S });
    }
    cfg.validate()?;
    let scale = 0.25 * s;
    let budget = 0.5 * cfg.abs_tol;
    let panel_tol = 1e-3 * cfg.abs_tol / scale;
    let f = |t: f64| kernel_pow(t, s) * t;
    let mut zeros = ZeroTable::new();
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut lo = 0.0;
    let mut last_bound = f64::INFINITY;
    for k in 1..=cfg.max_panels {
        let hi = zeros.get(k);
        if k == 1 {
            // Near 0, |k(t)|^s ~ exp(-s t^2 / 8); breakpoints on that scale keep
            // the peak visible to the rule for large s.
            let width = (8.0 / s).sqrt();
            let mut a = 0.0;
            let mut b = width;
            while a < hi {
                let r = gk::integrate(f, a, b.min(hi), panel_tol, 100);
                sum += r.value;
                err += r.error;
                a = b;
                b *= 2.0;
            }
        } else {
            let r = gk::integrate(f, lo, hi, panel_tol, 100);
            sum += r.value;
            err += r.error;
        }
        lo = hi;
        let crude = scale * envelope_tail(s, hi);
        last_bound = last_bound.min(crude);
        if crude <= budget {
            return Ok(PsiValue {
                s,
                value: scale * sum,
                error: scale * err + crude,
            });
        }
        if hi >= AVERAGE_MIN {
            let (tail, bound) = averaged_tail(s, hi);
            last_bound = last_bound.min(scale * bound);
            if scale * bound <= budget {
                return Ok(PsiValue {
                    s,
                    value: scale * (sum + tail),
                    error: scale * (err + bound),
                });
            }
        }
    }
    Err(Error::TolNotReached {
        abs_tol: cfg.abs_tol,
        max_panels: cfg.max_panels,
        tail_bound: last_bound,
    })
}
