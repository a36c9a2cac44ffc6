use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("direction has no nonzero entry")]
    ZeroVector,
    #[error("direction entry {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: usize },
    #[error("not a canonical direction: {0}")]
    NotCanonical(String),
    #[error("tolerance {abs_tol:e} not reached within {max_panels} panels (tail bound {tail_bound:e})")]
    TolNotReached {
        abs_tol: f64,
        max_panels: usize,
        tail_bound: f64,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Psi({s}) converges too slowly near s = 4/3; refusing s < {min}")]
    SlowConvergence { s: f64, min: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
