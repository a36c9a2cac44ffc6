use std::f64::consts::PI;

use super::gauss::RulePair;
use super::{group_weights, hankel_tail, Method, QuadratureConfig, VolumeEstimate};
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::special::{kernel, KernelEnvelope};

/// Panel refinement depth limit.
const MAX_DEPTH: u32 = 24;
/// Tail checks run when `t` has grown by this factor since the previous check.
const CHECK_GROWTH: f64 = 1.002;

/// `1/2 int_T^inf t prod_j min(1, c (w_j t)^{-3/2})^{m_j} dt`, evaluated in closed form.
///
/// Returns `+inf` when the integral diverges (fewer than two factors).
pub fn envelope_tail_bound(groups: &[(f64, u32)], t0: f64) -> f64 {
    let env = KernelEnvelope::default();
    let n: u32 = groups.iter().map(|g| g.1).sum();
    if n < 2 {
        return f64::INFINITY;
    }
    // Breakpoints t_switch / w_j are increasing since the weights are decreasing.
    let mut total = 0.0;
    let mut ln_k = 0.0;
    let mut active: u32 = 0;
    let mut lo = t0;
    for i in 0..=groups.len() {
        let hi = groups.get(i).map_or(f64::INFINITY, |g| env.t_switch / g.0);
        if hi > lo {
            let q = 2.0 - 1.5 * f64::from(active);
            let ln_piece = if hi.is_infinite() {
                if q >= 0.0 {
                    return f64::INFINITY;
                }
                q * lo.ln() - (-q).ln()
            } else if q < 0.0 {
                q * lo.ln() + (-(q * (hi / lo).ln()).exp_m1()).ln() - (-q).ln()
            } else if q > 0.0 {
                q * hi.ln() + (-(q * (lo / hi).ln()).exp_m1()).ln() - q.ln()
            } else {
                (hi / lo).ln().ln()
            };
            total += 0.5 * (ln_k + ln_piece).exp();
            lo = hi;
        }
        if let Some(&(w, m)) = groups.get(i) {
            ln_k += f64::from(m) * (env.c_env.ln() - 1.5 * w.ln());
            active += m;
        }
    }
    total
}

fn integrand(groups: &[(f64, u32)], t: f64) -> f64 {
    let mut p = 0.5 * t;
    for &(w, m) in groups {
        p *= kernel(w * t).powi(m as i32);
    }
    p
}

fn refine<F: FnMut(f64) -> f64>(
    rules: &RulePair,
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let (v, e) = rules.panel(f, a, b);
    if e <= tol || depth >= MAX_DEPTH {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let (v1, e1) = refine(rules, f, a, m, 0.5 * tol, depth + 1);
    let (v2, e2) = refine(rules, f, m, b, 0.5 * tol, depth + 1);
    (v1 + v2, e1 + e2)
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// `A_n(a)` from the Fourier integral.
///
/// Panels of width `panel_width_factor * pi / a_1` are integrated until the tail
/// beyond the current panel end is bounded by `abs_tol / 2`, either by the
/// algebraic envelope (tail value 0) or by the Hankel expansion with its
/// remainder bound. The reported error is the tail bound plus the panel
/// error estimates.
pub fn volume_quadrature(a: &Direction, cfg: &QuadratureConfig) -> Result<VolumeEstimate> {
    cfg.validate()?;
    let groups = group_weights(a.nonzero());
    let n: u32 = groups.iter().map(|g| g.1).sum();
    if n == 1 {
        return Ok(VolumeEstimate {
            value: 1.0,
            method: Method::Quadrature,
            error: 0.0,
            samples_or_panels: 0,
        });
    }
    let rules = RulePair::new(cfg.nodes_per_panel);
    let width = cfg.panel_width_factor * PI / groups[0].0;
    let tail_budget = 0.5 * cfg.abs_tol;
    let panel_tol = 1e-4 * cfg.abs_tol;
    let mut f = |t: f64| integrand(&groups, t);

    let mut sum = Sum::default();
    let mut panel_err = 0.0;
    let mut next_check = 0.0;
    let mut last_bound = f64::INFINITY;
    for k in 0..cfg.max_panels {
        let lo = k as f64 * width;
        let hi = lo + width;
        let (v, e) = refine(&rules, &mut f, lo, hi, panel_tol, 0);
        sum.add(v);
        panel_err += e;
        if hi < next_check {
            continue;
        }
        next_check = hi * CHECK_GROWTH;
        let env = envelope_tail_bound(&groups, hi);
        last_bound = last_bound.min(env);
        if env <= tail_budget {
            return Ok(VolumeEstimate {
                value: sum.value(),
                method: Method::Quadrature,
                error: panel_err + env,
                samples_or_panels: k as u64 + 1,
            });
        }
        if envelope_is_close(&groups, hi, env, tail_budget) {
            continue;
        }
        if let Some(plan) = hankel_tail::remainder_bound(&groups, hi) {
            last_bound = last_bound.min(plan.bound);
            if plan.bound <= tail_budget {
                let (tail, tail_err) =
                    hankel_tail::tail_value(&groups, hi, plan.order, 0.25 * cfg.abs_tol);
                return Ok(VolumeEstimate {
                    value: sum.value() + tail,
                    method: Method::Quadrature,
                    error: panel_err + plan.bound + tail_err,
                    samples_or_panels: k as u64 + 1,
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

/// True when the envelope bound alone will meet the budget before `t` quadruples,
/// in which case the costlier expansion is not attempted.
fn envelope_is_close(groups: &[(f64, u32)], t: f64, env: f64, budget: f64) -> bool {
    let env_later = envelope_tail_bound(groups, 4.0 * t);
    env_later <= budget && env.is_finite()
}
