//! Tail `1/2 int_T^inf prod_j k(w_j t)^{m_j} t dt` from the Hankel expansion.
//!
//! Each factor is `k(x) = C x^{-3/2} Re[e^{i(x - 3pi/4)} h(1/x)] + r(x)` with
//! `C = 2 sqrt(2/pi)`, `h(u) = sum_{k<2K} a_k(1) (i u)^k` and
//! `|r(x)| <= C x^{-3/2} (|a_2K| x^-2K + |a_2K+1| x^-2K-1)` for real `x > 0`.
//! The product of the truncated expansions is a finite sum of terms
//! `c t^{-3n/2} p(1/t) e^{i omega t}`; each is integrated exactly along a
//! rotated ray `t = T + i s` where it decays exponentially.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::gk;

/// Expansion orders tried; `2K` terms of `h` are kept.
const MAX_ORDER: usize = 24;
/// Largest number of `omega` combinations expanded.
pub(crate) const MAX_COMBOS: usize = 4096;
/// Smallest `w_min T` at which the expansion is attempted.
pub(crate) const MIN_ARG: f64 = 4.0;

fn amplitude() -> f64 {
    2.0 * (2.0 / PI).sqrt()
}

/// `a_k(1)` for `k < len`.
fn coefficients(len: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(len);
    let mut cur = 1.0;
    a.push(cur);
    for k in 1..len {
        let odd = (2 * k - 1) as f64;
        cur *= (4.0 - odd * odd) / (8.0 * k as f64);
        a.push(cur);
    }
    a
}

fn combo_count(groups: &[(f64, u32)]) -> usize {
    groups
        .iter()
        .try_fold(1usize, |acc, &(_, m)| acc.checked_mul(m as usize + 1))
        .unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TailPlan {
    pub order: usize,
    pub bound: f64,
}

/// Bound on the tail minus its truncated expansion, minimised over the order.
pub(crate) fn remainder_bound(groups: &[(f64, u32)], t0: f64) -> Option<TailPlan> {
    let n: u32 = groups.iter().map(|g| g.1).sum();
    let w_min = groups.last()?.0;
    if n < 2 || w_min * t0 < MIN_ARG || combo_count(groups) > MAX_COMBOS {
        return None;
    }
    let nf = f64::from(n);
    let a = coefficients(2 * MAX_ORDER + 2);
    let ln_pref = groups
        .iter()
        .map(|&(w, m)| f64::from(m) * (amplitude().ln() - 1.5 * w.ln()))
        .sum::<f64>()
        + (2.0 - 1.5 * nf) * t0.ln()
        - (1.5 * nf - 2.0).ln()
        - 2f64.ln();
    let mut best: Option<TailPlan> = None;
    for order in 1..=MAX_ORDER {
        let mut ln_g = 0.0;
        let mut s = 0.0;
        for &(w, m) in groups {
            let inv = 1.0 / (w * t0);
            let g = a[..2 * order].iter().rev().fold(0.0, |acc, c| acc * inv + c.abs());
            let e = a[2 * order].abs() * inv.powi(2 * order as i32)
                + a[2 * order + 1].abs() * inv.powi(2 * order as i32 + 1);
            ln_g += f64::from(m) * g.ln();
            s += f64::from(m) * (e / g).ln_1p();
        }
        let bound = (ln_pref + ln_g).exp() * s.exp_m1();
        if best.map_or(true, |b| bound < b.bound) {
            best = Some(TailPlan { order, bound });
        }
    }
    best
}

struct Factor {
    weight: f64,
    mult: u32,
    /// Coefficients of `h(u / w)` in powers of `u`.
    plus: Vec<Complex64>,
    /// Same for the conjugate expansion.
    minus: Vec<Complex64>,
}

fn poly(c: &[Complex64], u: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * u + x)
}

fn ln_binom(m: u32, k: u32) -> f64 {
    (1..=k).map(|j| (f64::from(m - k + j) / f64::from(j)).ln()).sum()
}

/// Value of the truncated expansion integrated over `[t0, inf)`, and its quadrature error.
pub(crate) fn tail_value(groups: &[(f64, u32)], t0: f64, order: usize, abs_tol: f64) -> (f64, f64) {
    let a = coefficients(2 * order);
    let factors: Vec<Factor> = groups
        .iter()
        .map(|&(w, m)| {
            let mut ipow = Complex64::new(1.0, 0.0);
            let mut plus = Vec::with_capacity(a.len());
            let mut minus = Vec::with_capacity(a.len());
            let mut scale = 1.0;
            for &ak in &a {
                plus.push(ipow * (ak * scale));
                minus.push(ipow.conj() * (ak * scale));
                ipow *= Complex64::new(0.0, 1.0);
                scale /= w;
            }
            Factor { weight: w, mult: m, plus, minus }
        })
        .collect();
    let n: u32 = groups.iter().map(|g| g.1).sum();
    let power = 1.0 - 1.5 * f64::from(n);
    let ln_amp: f64 = factors
        .iter()
        .map(|f| f64::from(f.mult) * (amplitude().ln() - 1.5 * f.weight.ln() - 2f64.ln()))
        .sum::<f64>()
        - 2f64.ln();

    let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
    let mut digits = vec![0u32; factors.len()];
    loop {
        let omega: f64 = factors
            .iter()
            .zip(&digits)
            .map(|(f, &k)| (2.0 * f64::from(k) - f64::from(f.mult)) * f.weight)
            .sum();
        if omega >= 0.0 {
            terms.push((digits.clone(), omega));
        }
        // mixed-radix increment
        let mut i = 0;
        while i < digits.len() {
            digits[i] += 1;
            if digits[i] <= factors[i].mult {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == digits.len() {
            break;
        }
    }

    let per_term_tol = abs_tol / terms.len().max(1) as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for (digits, omega) in &terms {
        let sigma: i64 = factors
            .iter()
            .zip(digits)
            .map(|(f, &k)| 2 * i64::from(k) - i64::from(f.mult))
            .sum();
        let ln_c = ln_amp
            + factors
                .iter()
                .zip(digits)
                .map(|(f, &k)| ln_binom(f.mult, k))
                .sum::<f64>();
        let phase = Complex64::from_polar(1.0, -3.0 * FRAC_PI_4 * sigma as f64);
        let integrand = |t: Complex64| -> Complex64 {
            let u = t.inv();
            let mut prod = Complex64::new(1.0, 0.0);
            for (f, &k) in factors.iter().zip(digits) {
                if k > 0 {
                    prod *= poly(&f.plus, u).powu(k);
                }
                if f.mult > k {
                    prod *= poly(&f.minus, u).powu(f.mult - k);
                }
            }
            let lt = t.ln();
            let expo = Complex64::new(ln_c, 0.0) + lt * power + Complex64::new(0.0, *omega) * t;
            phase * prod * expo.exp()
        };
        let (value, e) = if *omega > 0.0 {
            let scale = t0.min(1.0 / omega);
            let r = gk::integrate(
                |v: f64| {
                    let s = scale * v / (1.0 - v);
                    let jac = scale / ((1.0 - v) * (1.0 - v));
                    integrand(Complex64::new(t0, s)) * Complex64::new(0.0, jac)
                },
                0.0,
                1.0,
                0.5 * per_term_tol,
                2000,
            );
            (2.0 * r.value.re, 2.0 * r.error)
        } else {
            let r = gk::integrate(
                |v: f64| {
                    let s = t0 * v / (1.0 - v);
                    let jac = t0 / ((1.0 - v) * (1.0 - v));
                    integrand(Complex64::new(t0 + s, 0.0)) * jac
                },
                0.0,
                1.0,
                per_term_tol,
                2000,
            );
            (r.value.re, r.error)
        };
        total += value;
        err += e;
    }
    (total, err)
}
