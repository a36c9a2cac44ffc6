use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{Method, VolumeEstimate};
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Samples per parallel work unit; partial sums merge in chunk order.
const CHUNK: u64 = 4096;

fn sphere_point<R: Rng>(rng: &mut R) -> [f64; 4] {
    loop {
        let g: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let r2: f64 = g.iter().map(|x| x * x).sum();
        if r2 > 0.0 {
            let r = r2.sqrt();
            return g.map(|x| x / r);
        }
    }
}

/// One draw of `min{a_1^-2, |sum_{k>=2} a_k xi_k|^-2}` with `|0|^-2 = inf`.
///
/// `rest` holds `a_2, ..., a_n`. The value lies in `(0, a_1^-2]`.
pub fn rao_blackwell_sample<R: Rng>(a1: f64, rest: &[f64], rng: &mut R) -> f64 {
    let cap = 1.0 / (a1 * a1);
    let mut s = [0.0f64; 4];
    for &w in rest {
        let xi = sphere_point(rng);
        for (acc, x) in s.iter_mut().zip(xi) {
            *acc += w * x;
        }
    }
    let r2: f64 = s.iter().map(|x| x * x).sum();
    if r2 == 0.0 {
        cap
    } else {
        cap.min(1.0 / r2)
    }
}

/// Welford accumulator with Chan's merge.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.count as f64 * other.count as f64 / count as f64);
        Moments { count, mean, m2 }
    }
}

/// Mean of the Rao-Blackwellised estimator over `num_samples` draws (stream 0).
pub fn volume_monte_carlo(a: &Direction, num_samples: u64, seed: u64) -> Result<VolumeEstimate> {
    volume_monte_carlo_stream(a, num_samples, seed, 0)
}

/// As [`volume_monte_carlo`], on an explicit stream so that callers can give
/// distinct directions independent samples under one seed.
pub fn volume_monte_carlo_stream(
    a: &Direction,
    num_samples: u64,
    seed: u64,
    stream: u64,
) -> Result<VolumeEstimate> {
    if num_samples == 0 {
        return Err(Error::InvalidConfig("num_samples must be >= 1".into()));
    }
    let w = a.nonzero();
    let a1 = w[0];
    let rest = &w[1..];
    let key = StreamKey::new(seed, stream);
    let chunks = num_samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(num_samples) {
                let mut rng = key.item(i);
                m.push(rao_blackwell_sample(a1, rest, &mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let error = if total.count > 1 {
        let var = total.m2 / (total.count - 1) as f64;
        (var / total.count as f64).sqrt()
    } else {
        // Range bound: a sample in (0, a1^-2] has standard deviation at most a1^-2 / 2.
        0.5 / (a1 * a1)
    };
    Ok(VolumeEstimate {
        value: total.mean,
        method: Method::MonteCarlo,
        error,
        samples_or_panels: num_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::canonicalize;
    use crate::volume::volume_closed_form_n3;

    #[test]
    fn deterministic_cases() {
        let e = volume_monte_carlo(&Direction::e1(3), 100, 1).unwrap();
        assert_eq!((e.value, e.error), (1.0, 0.0));
        let a = canonicalize(&[0.8, 0.6]).unwrap();
        let e = volume_monte_carlo(&a, 1000, 1).unwrap();
        assert!((e.value - 1.0 / 0.64).abs() < 1e-12);
        assert!(e.error < 1e-12);
    }

    #[test]
    fn reproducible_bit_for_bit() {
        let a = Direction::uniform(4);
        let x = volume_monte_carlo(&a, 10_000, 99).unwrap();
        let y = volume_monte_carlo(&a, 10_000, 99).unwrap();
        assert_eq!(x.value.to_bits(), y.value.to_bits());
        assert_eq!(x.error.to_bits(), y.error.to_bits());
        let z = volume_monte_carlo(&a, 10_000, 100).unwrap();
        assert_ne!(x.value, z.value);
    }

    #[test]
    fn samples_are_bounded() {
        let a = canonicalize(&[0.5, 0.5, 0.5, 0.4, 0.1]).unwrap();
        let key = StreamKey::new(5, 0);
        let cap = 1.0 / (a.a1() * a.a1());
        for i in 0..5000 {
            let v = rao_blackwell_sample(a.a1(), &a.weights()[1..], &mut key.item(i));
            assert!(v > 0.0 && v <= cap);
        }
    }

    #[test]
    fn agrees_with_closed_form() {
        let a = Direction::uniform(3);
        let e = volume_monte_carlo(&a, 200_000, 7).unwrap();
        let exact = volume_closed_form_n3(&a).unwrap();
        assert!((e.value - exact).abs() <= 4.0 * e.error, "{} {exact} {}", e.value, e.error);
    }

    #[test]
    fn rejects_zero_samples() {
        assert!(volume_monte_carlo(&Direction::uniform(3), 0, 1).is_err());
    }
}
