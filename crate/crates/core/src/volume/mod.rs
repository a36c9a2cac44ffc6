//! Engines for the normalised section volume `A_n(a)`.
//!
//! * [`volume_quadrature`]: the Fourier integral `1/2 int_0^inf prod_j k(a_j t) t dt`
//!   with `k(u) = 2 J1(u) / u`, on half-period panels, with a rigorous tail bound.
//! * [`volume_monte_carlo`]: Rao-Blackwellised sampling of `E |sum a_k xi_k|^-2`,
//!   `xi_k` uniform on the sphere `S^3`.
//! * [`volume_closed_form_n3`]: a one-dimensional integral over the angle between
//!   two sphere vectors, exact up to 1e-10 for `n = 3`.

mod closed_form;
mod gauss;
mod hankel_tail;
mod monte_carlo;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Error, Result};

pub use closed_form::volume_closed_form_n3;
pub use monte_carlo::{rao_blackwell_sample, volume_monte_carlo, volume_monte_carlo_stream};
pub use quadrature::{envelope_tail_bound, volume_quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
            Method::ClosedForm => "closed_form",
        })
    }
}

/// A value of `A_n(a)` with its error accounting.
///
/// `error` is a truncation plus panel bound for quadrature, the standard error
/// of the mean for Monte Carlo, and a rounding-level bound for closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub method: Method,
    pub error: f64,
    pub samples_or_panels: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    /// Panel width in units of `pi / a_1`.
    pub panel_width_factor: f64,
    pub max_panels: usize,
    /// Gauss-Legendre order `N`; each panel is integrated with `N` and `N + 1`
    /// nodes and the difference is the panel error estimate.
    pub nodes_per_panel: usize,
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidConfig(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if !(self.panel_width_factor > 0.0) || !self.panel_width_factor.is_finite() {
            return Err(Error::InvalidConfig("panel_width_factor must be > 0".into()));
        }
        if self.max_panels < 1 {
            return Err(Error::InvalidConfig("max_panels must be >= 1".into()));
        }
        if self.nodes_per_panel < 2 {
            return Err(Error::InvalidConfig("nodes_per_panel must be >= 2".into()));
        }
        Ok(())
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            panel_width_factor: 1.0,
            max_panels: 50_000_000,
            nodes_per_panel: 8,
        }
    }
}

/// Routes by effective dimension: 1 and 2 exactly, 3 by the angular integral,
/// otherwise quadrature.
pub fn volume_auto(a: &Direction, cfg: &QuadratureConfig) -> Result<VolumeEstimate> {
    let w = a.nonzero();
    match w.len() {
        1 => Ok(VolumeEstimate {
            value: 1.0,
            method: Method::ClosedForm,
            error: 0.0,
            samples_or_panels: 0,
        }),
        2 => Ok(VolumeEstimate {
            value: 1.0 / (w[0] * w[0]),
            method: Method::ClosedForm,
            error: 4.0 * f64::EPSILON / (w[0] * w[0]),
            samples_or_panels: 0,
        }),
        3 => {
            let reduced = Direction::new(w.to_vec())?;
            let value = volume_closed_form_n3(&reduced)?;
            Ok(VolumeEstimate {
                value,
                method: Method::ClosedForm,
                error: closed_form::CLOSED_FORM_ERROR,
                samples_or_panels: 0,
            })
        }
        _ => volume_quadrature(a, cfg),
    }
}

/// Nonzero weights grouped into `(weight, multiplicity)`, largest first.
pub(crate) fn group_weights(w: &[f64]) -> Vec<(f64, u32)> {
    let mut groups: Vec<(f64, u32)> = Vec::new();
    for &x in w.iter().filter(|&&x| x > 0.0) {
        match groups.last_mut() {
            Some(last) if last.0 == x => last.1 += 1,
            _ => groups.push((x, 1)),
        }
    }
    groups
}
