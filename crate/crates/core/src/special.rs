//! Bessel kernel `2 J1(u) / u`, zeros of `J1`, and the algebraic tail envelope.
//!
//! `J1` is evaluated by three branches:
//!
//! * `|t| <= SERIES_MAX`: the defining power series,
//! * `SERIES_MAX < |t| < HANKEL_MIN`: Miller's backward recurrence normalised
//!   with `J0 + 2 (J2 + J4 + ...) = 1`,
//! * `|t| >= HANKEL_MIN`: the Hankel asymptotic expansion `P cos(chi) - Q sin(chi)`.
//!
//! The switch points are cross-checked in the unit tests (agreement of the two
//! adjacent branches at each switch to 1e-12 or better).

use std::f64::consts::{FRAC_2_PI, PI};

/// Upper end of the power-series branch.
pub const SERIES_MAX: f64 = 8.0;
/// Lower end of the Hankel asymptotic branch.
pub const HANKEL_MIN: f64 = 20.0;

/// Envelope constant: `|2 J1(u) / u| <= C_ENV * u^(-3/2)` for all `u > 0`.
///
/// The asymptotic amplitude of `2 J1(u) u^(1/2)` is `2 sqrt(2/pi) ~ 1.5958`, but
/// the supremum over `u > 0` is `~1.65006`, reached near `u = 2.1659`.
pub const C_ENV: f64 = 1.66;

/// Algebraic envelope `min(1, c_env u^(-3/2))` for the Bessel kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEnvelope {
    pub c_env: f64,
    /// Point where `c_env u^(-3/2)` drops below the trivial bound 1.
    pub t_switch: f64,
}

impl KernelEnvelope {
    pub fn new(c_env: f64) -> Self {
        Self {
            c_env,
            t_switch: c_env.powf(2.0 / 3.0),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= self.t_switch {
            1.0
        } else {
            (self.c_env * u.powf(-1.5)).min(1.0)
        }
    }
}

impl Default for KernelEnvelope {
    fn default() -> Self {
        Self::new(C_ENV)
    }
}

/// Bessel function of the first kind of order one.
pub fn bessel_j1(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t < 0.0 {
        return -bessel_j1(-t);
    }
    if t.is_infinite() {
        return 0.0;
    }
    if t <= SERIES_MAX {
        series_j1(t)
    } else if t < HANKEL_MIN {
        miller(t).1
    } else {
        hankel(1, t)
    }
}

/// Bessel function of the first kind of order zero (used for Newton steps on `J1`).
pub fn bessel_j0(t: f64) -> f64 {
    let t = t.abs();
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    if t <= SERIES_MAX {
        series_j0(t)
    } else if t < HANKEL_MIN {
        miller(t).0
    } else {
        hankel(0, t)
    }
}

/// The kernel `2 J1(u) / u`, with `kernel(0) = 1`.
pub fn kernel(u: f64) -> f64 {
    let u = u.abs();
    if u <= SERIES_MAX {
        // Dividing the series by u term-wise avoids the 0/0 at the origin.
        let q = -0.25 * u * u;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + 1.0));
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
                break;
            }
        }
        sum
    } else {
        2.0 * bessel_j1(u) / u
    }
}

/// `min(1, C_ENV u^(-3/2))`; dominates `|kernel(u)|` for every `u > 0`.
pub fn tail_envelope(u: f64) -> f64 {
    KernelEnvelope::default().eval(u)
}

fn series_j1(t: f64) -> f64 {
    let half = 0.5 * t;
    let q = -half * half;
    let mut term = half;
    let mut sum = half;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            break;
        }
    }
    sum
}

fn series_j0(t: f64) -> f64 {
    let q = -0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) || term == 0.0 {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence; returns `(J0(t), J1(t))`.
fn miller(t: f64) -> (f64, f64) {
    let start = 2 * ((t as usize + 40) / 2);
    let two_over_t = 2.0 / t;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let prev = (k as f64) * two_over_t * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if k - 1 == 1 {
            j1 = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    (cur / norm, j1 / norm)
}

/// Hankel expansion for order 0 or 1 at `x >= HANKEL_MIN`.
fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let (s, c) = x.sin_cos();
    let inv8x = 1.0 / (8.0 * x);
    // a_k(nu) / x^k built recursively; even k feed P, odd k feed Q.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev_abs = f64::INFINITY;
    for k in 1..200u32 {
        let odd = f64::from(2 * k - 1);
        term *= (mu - odd * odd) * inv8x / f64::from(k);
        let abs = term.abs();
        if abs > prev_abs {
            break;
        }
        prev_abs = abs;
        // sign pattern: P = a0 - a2/x^2 + a4/x^4 ..., Q = a1/x - a3/x^3 + ...
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if abs < 1e-18 {
            break;
        }
    }
    let r = std::f64::consts::SQRT_2.recip();
    let (cos_chi, sin_chi) = if order == 0 {
        // chi = x - pi/4
        ((c + s) * r, (s - c) * r)
    } else {
        // chi = x - 3 pi/4
        ((s - c) * r, -(s + c) * r)
    };
    (FRAC_2_PI / x).sqrt() * (p * cos_chi - q * sin_chi)
}

/// First `m` positive zeros of `J1`, in increasing order.
pub fn j1_zeros(m: usize) -> Vec<f64> {
    (1..=m).map(j1_zero).collect()
}

/// The `k`-th positive zero of `J1` (`k >= 1`).
pub fn j1_zero(k: usize) -> f64 {
    let beta = (k as f64 + 0.25) * PI;
    let guess = beta - 3.0 / (8.0 * beta);
    let mut lo = guess - 0.5;
    let mut hi = guess + 0.5;
    let mut f_lo = bessel_j1(lo);
    let f_hi = bessel_j1(hi);
    debug_assert!(f_lo * f_hi < 0.0, "zero {k} not bracketed");
    let mut x = guess;
    for _ in 0..100 {
        let fx = bessel_j1(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        let deriv = bessel_j0(x) - fx / x;
        let newton = x - fx / deriv;
        let next = if deriv != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}

/// Lazily extended table of `J1` zeros.
#[derive(Debug, Default, Clone)]
pub struct ZeroTable {
    zeros: Vec<f64>,
}

impl ZeroTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Zero number `k` (1-based).
    pub fn get(&mut self, k: usize) -> f64 {
        while self.zeros.len() < k {
            let next = self.zeros.len() + 1;
            self.zeros.push(j1_zero(next));
        }
        self.zeros[k - 1]
    }
}
