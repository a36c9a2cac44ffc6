//! Explicit upper and lower bounds on `A_n(a)` and the partition of the
//! `(a_1, a_2)` triangle into regions, each carrying its own upper bound.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::psi::{psi, PSI_MIN_S};
use crate::volume::{group_weights, QuadratureConfig};

pub const LIPSCHITZ_CONSTANT: f64 = 4.0 * SQRT_2;
/// Coefficient of the distance term in the main deficit.
pub const DISTANCE_COEFF: f64 = 1e-40;
/// Divisor of `||a||_4^4` in the main deficit.
pub const L4_DIVISOR: f64 = 76.0;
/// Berry-Esseen constant `42 d^{1/4} + 16` in dimension `d = 4`.
pub const BERRY_ESSEEN_CONST: f64 = 42.0 * SQRT_2 + 16.0;

/// `sqrt(3/8)`: below it every `a_k^-2 >= 8/3`.
pub fn small_weights_threshold() -> f64 {
    (3.0f64 / 8.0).sqrt()
}

fn require_n2(a: &Direction) -> Result<()> {
    if a.n() < 2 {
        return Err(Error::DimensionMismatch {
            expected: "n >= 2".into(),
            got: a.n(),
        });
    }
    Ok(())
}

/// `delta(a) = 2 - sqrt(2)(a_1 + a_2) = |a - (e_1 + e_2)/sqrt(2)|^2`.
pub fn delta(a: &Direction) -> Result<f64> {
    require_n2(a)?;
    Ok(2.0 - SQRT_2 * (a.a1() + a.a2()))
}

/// `|a - (e_1 + e_2)/sqrt(2)|^2` by direct summation.
pub fn delta_direct(a: &Direction) -> Result<f64> {
    require_n2(a)?;
    a.distance(&Direction::extremiser(a.n()))
        .map(|d| d * d)
}

/// `2 - min{1e-40 |a - (e_1+e_2)/sqrt(2)|, ||a||_4^4 / 76}`.
pub fn theorem1_upper(a: &Direction) -> Result<f64> {
    let dist = delta(a)?.max(0.0).sqrt();
    Ok(2.0 - (DISTANCE_COEFF * dist).min(a.l4_pow4() / L4_DIVISOR))
}

/// `1 + |a - e_1|^2 / 4 = 1 + (2 - 2 a_1) / 4`.
pub fn lower_stability(a: &Direction) -> f64 {
    1.0 + (2.0 - 2.0 * a.a1()) / 4.0
}

/// Upper bound on `Psi(s)`: `1 - (s-2)^2/12` on `[2, 8/3]`, `1 - 1/(151 s)` on `[8/3, inf)`.
///
/// At `s = 8/3` both branches hold and the smaller is returned. `None` for `s < 2`.
pub fn psi_quant_bound(s: f64) -> Option<f64> {
    let near = (2.0..=8.0 / 3.0).contains(&s).then(|| 1.0 - (s - 2.0).powi(2) / 12.0);
    let far = (s >= 8.0 / 3.0).then(|| 1.0 - 1.0 / (151.0 * s));
    match (near, far) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// `2 prod_k Psi(a_k^-2)^{a_k^2}` over nonzero weights, each factor taken as
/// value plus error. `+inf` when some `a_k^-2` is below the supported range.
pub fn fourier_product_upper(a: &Direction, cfg: &QuadratureConfig) -> Result<f64> {
    let mut log = 0.0;
    for (w, m) in group_weights(a.nonzero()) {
        let s = 1.0 / (w * w);
        if s <= 4.0 / 3.0 || s < PSI_MIN_S {
            return Ok(f64::INFINITY);
        }
        let p = psi(s, cfg)?;
        log += f64::from(m) * w * w * (p.value + p.error).ln();
    }
    Ok(2.0 * log.exp())
}

/// `(1/a_1^2)(1 - exp(-2 a_1^2 / (1 - a_1^2)))`, the Gaussian comparison term.
pub fn gaussian_comparison(a1: f64) -> Result<f64> {
    if !(a1 > 0.0 && a1 < 1.0) {
        return Err(Error::Domain(format!("need 0 < a1 < 1, got {a1}")));
    }
    let a1s = a1 * a1;
    Ok(-(-2.0 * a1s / (1.0 - a1s)).exp_m1() / a1s)
}

/// Gaussian term plus `8 (42 sqrt 2 + 16) a_2 / (a_1^2 sqrt(1 - a_1^2))`.
pub fn berry_esseen_bound(a1: f64, a2: f64) -> Result<f64> {
    let g = gaussian_comparison(a1)?;
    Ok(g + 8.0 * BERRY_ESSEEN_CONST * a2 / (a1 * a1 * (1.0 - a1 * a1).sqrt()))
}

pub fn berry_esseen_upper(a: &Direction) -> Result<f64> {
    require_n2(a)?;
    berry_esseen_bound(a.a1(), a.a2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    L7,
    L8,
    L9,
    L10,
    C11,
    L12,
    L13,
}

impl std::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBound {
    pub tag: RegionTag,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAssignment {
    /// Regions whose hypotheses hold, in tag order.
    pub applicable: Vec<RegionBound>,
    pub delta: f64,
}

impl RegionAssignment {
    pub fn min_bound(&self) -> Option<f64> {
        self.applicable.iter().map(|r| r.bound).min_by(f64::total_cmp)
    }

    pub fn tags(&self) -> Vec<RegionTag> {
        self.applicable.iter().map(|r| r.tag).collect()
    }
}

pub const L7_DELTA_MAX: f64 = 1.0 / 5000.0;
pub const L9_A2_MAX: f64 = 6e-5;

/// All regions containing `a`, with closed boundaries.
///
/// `1/sqrt(2) + 6e-41` rounds to `1/sqrt(2)`, so L13 is tested as
/// `a_1 > FRAC_1_SQRT_2`; L12 is additionally reported within one ulp above it.
pub fn classify_region(a: &Direction) -> Result<RegionAssignment> {
    let d = delta(a)?;
    let (a1, a2) = (a.a1(), a.a2());
    let mid = small_weights_threshold()..=FRAC_1_SQRT_2;
    let c11_a2_max = (1.0 - 1e-5) / SQRT_2;
    let mut out = Vec::new();
    if d <= L7_DELTA_MAX {
        out.push(RegionBound {
            tag: RegionTag::L7,
            bound: 2.0 - d.max(0.0).sqrt() / 25.0,
        });
    }
    if a1 <= small_weights_threshold() {
        out.push(RegionBound {
            tag: RegionTag::L8,
            bound: 2.0 * (-a.l4_pow4() / 151.0).exp(),
        });
    }
    if mid.contains(&a1) {
        if a2 <= L9_A2_MAX {
            out.push(RegionBound { tag: RegionTag::L9, bound: 2.0 - 1e-5 });
        }
        if (L9_A2_MAX..=c11_a2_max).contains(&a2) {
            out.push(RegionBound { tag: RegionTag::L10, bound: 2.0 - 1e-19 });
        }
        if a2 <= c11_a2_max {
            out.push(RegionBound { tag: RegionTag::C11, bound: 2.0 - 1e-19 });
        }
    }
    if a1 > FRAC_1_SQRT_2 {
        let ulp_band = f64::from_bits(FRAC_1_SQRT_2.to_bits() + 1);
        if a1 <= ulp_band && a2 <= (1.0 - 1e-4) / SQRT_2 {
            out.push(RegionBound { tag: RegionTag::L12, bound: 2.0 - 1e-20 });
        }
        out.push(RegionBound {
            tag: RegionTag::L13,
            bound: 2.0 - 12.0 * SQRT_2 * 1e-41,
        });
    }
    Ok(RegionAssignment { applicable: out, delta: d })
}

/// `2 - min{(6/5) 1e-40 sqrt(delta), ||a||_4^4 / 76}`, the aggregated deficit target.
pub fn aggregation_target(a: &Direction) -> Result<f64> {
    let d = delta(a)?;
    Ok(2.0 - (1.2 * DISTANCE_COEFF * d.max(0.0).sqrt()).min(a.l4_pow4() / L4_DIVISOR))
}

/// `|A_a - A_b| <= 4 sqrt(2) |a - b| + slack`, where `slack` is the combined engine error.
pub fn lipschitz_check(a: &Direction, b: &Direction, value_a: f64, value_b: f64, slack: f64) -> Result<bool> {
    let dist = a.distance(b)?;
    Ok((value_a - value_b).abs() <= LIPSCHITZ_CONSTANT * dist + slack)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityBounds {
    pub upper_thm1: f64,
    pub lower_stab: f64,
    pub fourier_product: f64,
    pub lipschitz_constant: f64,
}

pub fn stability_bounds(a: &Direction, cfg: &QuadratureConfig) -> Result<StabilityBounds> {
    Ok(StabilityBounds {
        upper_thm1: theorem1_upper(a)?,
        lower_stab: lower_stability(a),
        fourier_product: fourier_product_upper(a, cfg)?,
        lipschitz_constant: LIPSCHITZ_CONSTANT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::canonicalize;
    use proptest::prelude::*;

    fn close(x: f64, y: f64, tol: f64) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }

    #[test]
    fn delta_examples() {
        close(delta(&Direction::extremiser(2)).unwrap(), 0.0, 1e-15);
        close(delta(&Direction::e1(2)).unwrap(), 2.0 - SQRT_2, 1e-15);
        close(delta(&Direction::uniform(3)).unwrap(), 2.0 - SQRT_2 * 2.0 / 3f64.sqrt(), 1e-15);
        assert!(delta(&Direction::e1(1)).is_err());
    }

    #[test]
    fn theorem1_examples() {
        assert_eq!(theorem1_upper(&Direction::extremiser(2)).unwrap(), 2.0);
        let e1 = theorem1_upper(&Direction::e1(3)).unwrap();
        // The distance term is far below one ulp of 2.
        assert_eq!(e1, 2.0);
        assert!(e1 <= 2.0);
    }

    #[test]
    fn lower_examples() {
        assert_eq!(lower_stability(&Direction::e1(3)), 1.0);
        close(lower_stability(&Direction::extremiser(2)), 1.0 + (2.0 - SQRT_2) / 4.0, 1e-15);
        close(
            lower_stability(&Direction::uniform(3)),
            1.0 + (2.0 - 2.0 / 3f64.sqrt()) / 4.0,
            1e-15,
        );
    }

    #[test]
    fn psi_branches() {
        assert_eq!(psi_quant_bound(1.9), None);
        assert_eq!(psi_quant_bound(2.0), Some(1.0));
        close(psi_quant_bound(2.2).unwrap(), 1.0 - 0.04 / 12.0, 1e-15);
        close(psi_quant_bound(8.0 / 3.0).unwrap(), 1.0 - 1.0 / 27.0, 1e-15);
        close(psi_quant_bound(200.0).unwrap(), 1.0 - 1.0 / 30200.0, 1e-15);
    }

    #[test]
    fn fourier_product_examples() {
        let cfg = QuadratureConfig::with_tol(1e-8);
        assert!(fourier_product_upper(&Direction::e1(3), &cfg).unwrap().is_infinite());
        close(fourier_product_upper(&Direction::extremiser(2), &cfg).unwrap(), 2.0, 2e-6);
        let u = fourier_product_upper(&Direction::uniform(16), &cfg).unwrap();
        assert!(u <= 2.0 * (1.0 - 1.0 / (151.0 * 16.0)) + 1e-6, "{u}");
    }

    #[test]
    fn gaussian_terms() {
        close(gaussian_comparison(FRAC_1_SQRT_2).unwrap(), 2.0 * (1.0 - (-2f64).exp()), 1e-12);
        close(
            gaussian_comparison(small_weights_threshold()).unwrap(),
            8.0 / 3.0 * (1.0 - (-1.2f64).exp()),
            1e-12,
        );
        let be = berry_esseen_bound(small_weights_threshold(), 6e-5).unwrap();
        assert!(be < 2.0 - 1e-5, "{be}");
        assert!(gaussian_comparison(1.0).is_err());
        let a = canonicalize(&[1.0, 0.0]).unwrap();
        assert!(berry_esseen_upper(&a).is_err());
    }

    #[test]
    fn region_examples() {
        let r = classify_region(&Direction::extremiser(2)).unwrap();
        assert_eq!(r.applicable[0], RegionBound { tag: RegionTag::L7, bound: 2.0 });
        let r = classify_region(&Direction::uniform(3)).unwrap();
        assert!(r.tags().contains(&RegionTag::L8));
        let l8 = r.applicable.iter().find(|b| b.tag == RegionTag::L8).unwrap().bound;
        close(l8, 2.0 * (-1.0f64 / 3.0 / 151.0).exp(), 1e-15);
        let a = canonicalize(&[0.9, (1.0f64 - 0.81).sqrt() / 2.0, (1.0f64 - 0.81).sqrt() / 2.0, (0.19f64 / 2.0).sqrt()]).unwrap();
        assert!(classify_region(&a).unwrap().tags().contains(&RegionTag::L13));
    }

    #[test]
    fn region_boundaries_are_closed() {
        let t = small_weights_threshold();
        let a = canonicalize(&[t, t, (1.0 - 2.0 * t * t).sqrt()]).unwrap();
        let tags = classify_region(&a).unwrap().tags();
        if a.a1() <= t {
            assert!(tags.contains(&RegionTag::L8));
        }
        if a.a1() >= t {
            assert!(tags.contains(&RegionTag::C11));
        }
    }

    #[test]
    fn lipschitz_examples() {
        let a = Direction::e1(2);
        let b = Direction::extremiser(2);
        assert!(lipschitz_check(&a, &a, 1.0, 1.0, 0.0).unwrap());
        assert!(lipschitz_check(&a, &b, 1.0, 2.0, 0.0).unwrap());
        assert!(!lipschitz_check(&a, &b, 1.0, 6.0, 0.0).unwrap());
    }

    proptest! {
        #[test]
        fn delta_identity(raw in prop::collection::vec(0.0f64..1.0, 2..10)) {
            prop_assume!(raw.iter().any(|&x| x > 0.0));
            let a = canonicalize(&raw).unwrap();
            prop_assert!((delta(&a).unwrap() - delta_direct(&a).unwrap()).abs() <= 1e-12);
        }

        #[test]
        fn regions_cover_and_bounds_are_at_most_two(raw in prop::collection::vec(0.0f64..1.0, 3..10)) {
            prop_assume!(raw.iter().any(|&x| x > 0.0));
            let a = canonicalize(&raw).unwrap();
            let r = classify_region(&a).unwrap();
            prop_assert!(!r.applicable.is_empty());
            prop_assert!(r.applicable.iter().all(|b| b.bound <= 2.0));
            prop_assert!(lower_stability(&a) >= 1.0);
            prop_assert!(theorem1_upper(&a).unwrap() <= 2.0);
            if r.delta > L7_DELTA_MAX {
                prop_assert!(r.min_bound().unwrap() <= aggregation_target(&a).unwrap() + 1e-12);
            }
        }
    }
}
