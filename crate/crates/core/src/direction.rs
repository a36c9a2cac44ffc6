use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum a_j^2 = 1` for a canonical direction.
pub const UNIT_TOL: f64 = 1e-12;

/// Canonical hyperplane normal: nonnegative, nonincreasing, unit length.
///
/// Zero entries are kept so that `n` is the ambient dimension; engines work on
/// [`Direction::nonzero`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction {
    weights: Vec<f64>,
}

impl Direction {
    /// Accepts weights that are already canonical; does not reorder or rescale.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "n >= 1".into(),
                got: 0,
            });
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::NotCanonical("negative entry".into()));
        }
        if weights.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::NotCanonical("entries not nonincreasing".into()));
        }
        let norm2: f64 = weights.iter().map(|w| w * w).sum();
        if (norm2 - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotCanonical(format!("squared norm {norm2} != 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Largest weight `a_1`.
    pub fn a1(&self) -> f64 {
        self.weights[0]
    }

    /// Second largest weight, or 0 when `n = 1`.
    pub fn a2(&self) -> f64 {
        self.weights.get(1).copied().unwrap_or(0.0)
    }

    /// The strictly positive weights (a prefix, since entries are sorted).
    pub fn nonzero(&self) -> &[f64] {
        let m = self.weights.iter().take_while(|&&w| w > 0.0).count();
        &self.weights[..m]
    }

    /// `sum a_j^4`, by direct summation.
    pub fn l4_pow4(&self) -> f64 {
        self.weights.iter().map(|w| (w * w) * (w * w)).sum()
    }

    /// Euclidean distance between two directions of equal dimension.
    pub fn distance(&self, other: &Direction) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n().to_string(),
                got: other.n(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// `e_1` in dimension `n`.
    pub fn e1(n: usize) -> Self {
        let mut w = vec![0.0; n.max(1)];
        w[0] = 1.0;
        Self { weights: w }
    }

    /// `(e_1 + e_2) / sqrt(2)` in dimension `n >= 2`.
    pub fn extremiser(n: usize) -> Self {
        let mut w = vec![0.0; n.max(2)];
        w[0] = std::f64::consts::FRAC_1_SQRT_2;
        w[1] = std::f64::consts::FRAC_1_SQRT_2;
        Self { weights: w }
    }

    /// `(1, ..., 1) / sqrt(n)`.
    pub fn uniform(n: usize) -> Self {
        let w = 1.0 / (n.max(1) as f64).sqrt();
        Self {
            weights: vec![w; n.max(1)],
        }
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Direction::new(weights)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.weights
    }
}

/// Absolute values, sorted nonincreasing, scaled to unit norm.
pub fn canonicalize(raw: &[f64]) -> Result<Direction> {
    if raw.is_empty() {
        return Err(Error::ZeroVector);
    }
    if let Some((index, &value)) = raw.iter().enumerate().find(|(_, w)| !w.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let mut w: Vec<f64> = raw.iter().map(|x| x.abs()).collect();
    let max = w.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroVector);
    }
    // Pre-scaling by the max keeps the squared norm finite for huge or tiny inputs.
    w.iter_mut().for_each(|x| *x /= max);
    w.sort_by(|a, b| b.total_cmp(a));
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= norm);
    Ok(Direction { weights: w })
}
