//! Hyperplane sections of the complex polydisc.
//!
//! For a unit vector `a` the normalised section volume `A_n(a)` lies in `[1, 2]`.
//! This crate computes it by three independent engines, evaluates the
//! analytic upper and lower bounds that control it, and sweeps directions to
//! check those bounds numerically.

pub mod bounds;
pub mod direction;
pub mod error;
pub mod gk;
pub mod harness;
pub mod psi;
pub mod rng;
pub mod special;
pub mod volume;

pub use direction::{canonicalize, Direction};
pub use error::{Error, Result};
pub use psi::{psi, PsiValue};
pub use volume::{
    volume_auto, volume_closed_form_n3, volume_monte_carlo, volume_quadrature, Method,
    QuadratureConfig, VolumeEstimate,
};
