//! Sweeps over direction space that evaluate every engine and bound and record
//! one pass/fail verdict per check, plus the one-dimensional scans.
//!
//! Every inequality is stored as `lhs <= rhs + slack`; `margin = rhs + slack - lhs`
//! is nonnegative exactly when the check passes.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, RegionBound};
use crate::direction::{canonicalize, Direction};
use crate::error::{Error, Result};
use crate::psi::{psi, PSI_MIN_S};
use crate::rng::StreamKey;
use crate::volume::{
    volume_auto, volume_closed_form_n3, volume_monte_carlo_stream, volume_quadrature, Method,
    QuadratureConfig, VolumeEstimate,
};

/// Floor added to every one-sided slack.
pub const SLACK_FLOOR: f64 = 1e-6;
/// Evaluation error attributed to closed-form bounds.
pub const BOUND_EVAL_ERROR: f64 = 1e-12;
/// Samples used when quadrature fails and a direction falls back to Monte Carlo.
pub const FALLBACK_MC_SAMPLES: u64 = 100_000;
/// Standard errors allowed between Monte Carlo and the primary engine.
pub const MC_SIGMAS: f64 = 4.0;

const SAMPLER_SALT: u64 = 0x5A3C_0001;
const MC_SALT: u64 = 0x5A3C_0002;
const LIPSCHITZ_SALT: u64 = 0x5A3C_0003;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    UniformSphere,
    DirichletSquares,
    Grid2d,
    SpecialVectors,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_sphere" => Ok(Sampler::UniformSphere),
            "dirichlet_squares" => Ok(Sampler::DirichletSquares),
            "grid_2d" => Ok(Sampler::Grid2d),
            "special_vectors" => Ok(Sampler::SpecialVectors),
            other => Err(Error::InvalidConfig(format!("unknown sampler {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub directions_per_n: usize,
    pub sampler: Sampler,
    pub seed: u64,
    pub engine_tolerances: QuadratureConfig,
    pub mc_samples: u64,
    /// Test hook: tightens the distance-deficit upper bound of record 0 by 1 so that it fails.
    #[serde(default)]
    pub inject_failure: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.directions_per_n < 1 {
            return Err(Error::InvalidConfig("directions_per_n must be >= 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values is empty".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidConfig(format!("every n must be >= 2, got {n}")));
        }
        self.engine_tolerances.validate()
    }
}

/// Draws the `index`-th direction of dimension `n`.
pub fn sample_direction(sampler: Sampler, n: usize, index: usize, count: usize, seed: u64) -> Direction {
    let mut rng = StreamKey::new(seed ^ SAMPLER_SALT, n as u64).item(index as u64);
    match sampler {
        Sampler::UniformSphere => loop {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(d) = canonicalize(&g) {
                return d;
            }
        },
        Sampler::DirichletSquares => {
            let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1).sqrt()).collect();
            canonicalize(&e).unwrap_or_else(|_| Direction::uniform(n))
        }
        Sampler::Grid2d => grid_point(n, index, count),
        Sampler::SpecialVectors => {
            let list = special_vectors(n);
            list[index % list.len()].clone()
        }
    }
}

fn grid_point(n: usize, index: usize, count: usize) -> Direction {
    if n == 2 {
        let eps = if count > 1 { 0.49 * index as f64 / (count - 1) as f64 } else { 0.0 };
        return canonicalize(&[(0.5 + eps).sqrt(), (0.5 - eps).sqrt()]).expect("nonzero");
    }
    let side = (count as f64).sqrt().ceil().max(1.0) as usize;
    let frac = |k: usize| if side > 1 { k as f64 / (side - 1) as f64 } else { 0.0 };
    let lo1 = 1.0 / (n as f64).sqrt();
    let a1 = lo1 + frac(index / side) * (1.0 - lo1);
    let rem = (1.0 - a1 * a1).max(0.0);
    let lo2 = (rem / (n - 1) as f64).sqrt();
    let hi2 = a1.min(rem.sqrt());
    let a2 = lo2 + frac(index % side) * (hi2 - lo2);
    let rest = ((rem - a2 * a2).max(0.0) / (n - 2) as f64).sqrt();
    let mut w = vec![a1, a2];
    w.resize(n, rest);
    canonicalize(&w).expect("a1 > 0")
}

/// Fixed directions of interest in dimension `n`.
pub fn special_vectors(n: usize) -> Vec<Direction> {
    let pad = |head: &[f64], tail: f64| {
        let mut w = head.to_vec();
        w.resize(n.max(head.len()), tail);
        canonicalize(&w).expect("nonzero")
    };
    let m = (n.max(2) - 1) as f64;
    let t = bounds::small_weights_threshold();
    vec![
        Direction::e1(n),
        Direction::extremiser(n),
        Direction::uniform(n),
        pad(&[FRAC_1_SQRT_2], (0.5 / m).sqrt()),
        pad(&[t], ((1.0 - t * t) / m).sqrt()),
        pad(&[0.9], (0.19 / m).sqrt()),
        pad(&[0.5005f64.sqrt(), 0.4995f64.sqrt()], 1e-3),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    /// Statistical comparison outside its band; reported, not counted as a failure.
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub status: Status,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: f64,
    pub margin: Option<f64>,
}

impl CheckResult {
    fn leq(check: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = rhs + slack - lhs;
        Self {
            check: check.into(),
            status: if margin >= 0.0 { Status::Pass } else { Status::Fail },
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack,
            margin: Some(margin),
        }
    }

    fn not_applicable(check: &str) -> Self {
        Self {
            check: check.into(),
            status: Status::NotApplicable,
            lhs: None,
            rhs: None,
            slack: 0.0,
            margin: None,
        }
    }

    fn flag(check: &str, ok: bool) -> Self {
        Self {
            check: check.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            lhs: None,
            rhs: None,
            slack: 0.0,
            margin: None,
        }
    }
}

/// Names of the per-record checks, in record order.
pub const CHECK_NAMES: [&str; 12] = [
    "engine",
    "slicing_lower",
    "slicing_upper",
    "theorem1",
    "lower_stability",
    "fourier_product",
    "region_coverage",
    "region_bound",
    "aggregation",
    "delta_identity",
    "n2_sqrt_delta",
    "mc_agreement",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValues {
    pub theorem1_upper: f64,
    pub lower_stability: f64,
    /// `None` when the product is infinite or outside the supported range.
    pub fourier_product_upper: Option<f64>,
    pub delta: f64,
    pub delta_direct: f64,
    pub l4_pow4: f64,
    pub aggregation_target: f64,
    pub min_region_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub index: usize,
    pub n: usize,
    pub direction: Vec<f64>,
    /// Primary value: `volume_auto`, or Monte Carlo when that failed.
    pub engine: VolumeEstimate,
    pub monte_carlo: Option<VolumeEstimate>,
    pub note: Option<String>,
    pub bounds: BoundValues,
    pub regions: Vec<RegionBound>,
    pub checks: Vec<CheckResult>,
}

impl DirectionRecord {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
    pub warn: usize,
    /// Smallest margin over records where the check was evaluated.
    pub worst_margin: Option<f64>,
    pub worst_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: usize,
    pub passed_records: usize,
    pub failed_checks: usize,
    pub checks: Vec<CheckSummary>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: SweepConfig,
    pub records: Vec<DirectionRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.summary.failed_checks == 0
    }

    /// Copy with wall-clock fields zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.summary.runtime_seconds = 0.0;
        r
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// One row per direction and check; see [`CsvRow`] for the columns.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            let weights = r
                .direction
                .iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(";");
            for c in &r.checks {
                w.serialize(CsvRow {
                    index: r.index,
                    n: r.n,
                    weights: weights.clone(),
                    engine: r.engine.method,
                    value: r.engine.value,
                    error: r.engine.error,
                    check: c.check.clone(),
                    status: c.status,
                    lhs: c.lhs,
                    rhs: c.rhs,
                    slack: c.slack,
                    margin: c.margin,
                })
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            }
        }
        w.flush().map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

/// Flat CSV schema of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub index: usize,
    pub n: usize,
    /// Semicolon-separated weights.
    pub weights: String,
    pub engine: Method,
    pub value: f64,
    pub error: f64,
    pub check: String,
    pub status: Status,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: f64,
    pub margin: Option<f64>,
}

fn evaluate(cfg: &SweepConfig, index: usize, n: usize, local: usize) -> DirectionRecord {
    let a = sample_direction(cfg.sampler, n, local, cfg.directions_per_n, cfg.seed);
    let stream = ((n as u64) << 32) | local as u64;
    let mut note = None;
    let mut checks = Vec::with_capacity(CHECK_NAMES.len());
    let engine = match volume_auto(&a, &cfg.engine_tolerances) {
        Ok(e) => {
            checks.push(CheckResult::flag("engine", true));
            e
        }
        Err(err) => {
            note = Some(format!("volume_auto failed ({err}); Monte Carlo fallback"));
            // Not a bound violation: the value is still checked, with statistical slack.
            checks.push(CheckResult {
                status: Status::Warn,
                ..CheckResult::not_applicable("engine")
            });
            volume_monte_carlo_stream(&a, FALLBACK_MC_SAMPLES, cfg.seed ^ MC_SALT, stream)
                .expect("nonzero direction")
        }
    };
    let monte_carlo = (cfg.mc_samples > 0)
        .then(|| volume_monte_carlo_stream(&a, cfg.mc_samples, cfg.seed ^ MC_SALT, stream).ok())
        .flatten();

    let value = engine.value;
    let engine_slack = match engine.method {
        Method::MonteCarlo => MC_SIGMAS * engine.error,
        _ => engine.error,
    };
    let slack = engine_slack + BOUND_EVAL_ERROR + SLACK_FLOOR;

    let delta = bounds::delta(&a).expect("n >= 2");
    let delta_direct = bounds::delta_direct(&a).expect("n >= 2");
    let mut thm1 = bounds::theorem1_upper(&a).expect("n >= 2");
    if cfg.inject_failure && index == 0 {
        thm1 -= 1.0;
    }
    let lower = bounds::lower_stability(&a);
    let product_applicable = a.a1() <= 1.0 / PSI_MIN_S.sqrt();
    let product = if product_applicable {
        match bounds::fourier_product_upper(&a, &cfg.engine_tolerances) {
            Ok(v) if v.is_finite() => Some(v),
            Ok(_) => None,
            Err(err) => {
                let msg = format!("fourier product failed ({err})");
                note = Some(note.map_or(msg.clone(), |n| format!("{n}; {msg}")));
                None
            }
        }
    } else {
        None
    };
    let regions = bounds::classify_region(&a).expect("n >= 2");
    let min_region = regions.min_bound();
    let target = bounds::aggregation_target(&a).expect("n >= 2");

    checks.push(CheckResult::leq("slicing_lower", 1.0, value, slack));
    checks.push(CheckResult::leq("slicing_upper", value, 2.0, slack));
    checks.push(CheckResult::leq("theorem1", value, thm1, slack));
    checks.push(CheckResult::leq("lower_stability", lower, value, slack));
    checks.push(match product {
        Some(p) => CheckResult::leq("fourier_product", value, p, slack),
        None => CheckResult::not_applicable("fourier_product"),
    });
    checks.push(if n >= 3 {
        CheckResult::flag("region_coverage", !regions.applicable.is_empty())
    } else {
        CheckResult::not_applicable("region_coverage")
    });
    checks.push(match min_region {
        Some(b) => CheckResult::leq("region_bound", value, b, slack),
        None => CheckResult::not_applicable("region_bound"),
    });
    checks.push(match min_region {
        Some(b) if delta > bounds::L7_DELTA_MAX => CheckResult::leq("aggregation", b, target, 1e-12),
        _ => CheckResult::not_applicable("aggregation"),
    });
    checks.push(CheckResult::leq("delta_identity", (delta - delta_direct).abs(), 0.0, 1e-12));
    checks.push(if n == 2 {
        CheckResult::leq("n2_sqrt_delta", value, 2.0 - delta.max(0.0).sqrt(), slack)
    } else {
        CheckResult::not_applicable("n2_sqrt_delta")
    });
    checks.push(match &monte_carlo {
        Some(mc) if engine.method != Method::MonteCarlo => {
            let mut c = CheckResult::leq(
                "mc_agreement",
                (value - mc.value).abs(),
                0.0,
                MC_SIGMAS * mc.error + engine.error,
            );
            if c.status == Status::Fail {
                c.status = Status::Warn;
            }
            c
        }
        _ => CheckResult::not_applicable("mc_agreement"),
    });

    DirectionRecord {
        index,
        n,
        direction: a.weights().to_vec(),
        engine,
        monte_carlo,
        note,
        bounds: BoundValues {
            theorem1_upper: thm1,
            lower_stability: lower,
            fourier_product_upper: product,
            delta,
            delta_direct,
            l4_pow4: a.l4_pow4(),
            aggregation_target: target,
            min_region_bound: min_region,
        },
        regions: regions.applicable,
        checks,
    }
}

fn summarize(records: &[DirectionRecord], runtime: f64) -> Summary {
    let mut checks: Vec<CheckSummary> = CHECK_NAMES
        .iter()
        .map(|name| CheckSummary {
            check: (*name).into(),
            ..Default::default()
        })
        .collect();
    for r in records {
        for c in &r.checks {
            let Some(s) = checks.iter_mut().find(|s| s.check == c.check) else {
                continue;
            };
            match c.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::NotApplicable => s.not_applicable += 1,
                Status::Warn => s.warn += 1,
            }
            if let Some(m) = c.margin {
                if s.worst_margin.map_or(true, |w| m < w) {
                    s.worst_margin = Some(m);
                    s.worst_index = Some(r.index);
                }
            }
        }
    }
    Summary {
        records: records.len(),
        passed_records: records.iter().filter(|r| r.passed()).count(),
        failed_checks: checks.iter().map(|c| c.fail).sum(),
        checks,
        runtime_seconds: runtime,
    }
}

/// Evaluates every sampled direction; records are ordered by `(n, sample index)`.
pub fn sweep(cfg: &SweepConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.directions_per_n).map(move |i| (n, i)))
        .collect();
    let records: Vec<DirectionRecord> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, &(n, local))| evaluate(cfg, index, n, local))
        .collect();
    let summary = summarize(&records, start.elapsed().as_secs_f64());
    Ok(VerificationReport {
        config: cfg.clone(),
        records,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub value: f64,
    pub error: f64,
    pub deficit: f64,
    pub scaled_deficit: f64,
    /// `n d_n` divided by the previous row's.
    pub ratio: Option<f64>,
    /// `|quadrature - closed form|` when `n = 3`.
    pub oracle_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticScan {
    pub rows: Vec<AsymptoticRow>,
    pub ratio_window: (f64, f64),
    pub deficits_positive: bool,
    pub stabilized: bool,
    /// Observed, not claimed: values increase along the listed `n`.
    pub monotone_increasing: bool,
    pub pass: bool,
}

pub const ASYMPTOTIC_RATIO_WINDOW: (f64, f64) = (0.75, 1.33);

/// `d_n = 2 - A_n(1/sqrt(n), ..., 1/sqrt(n))` by quadrature, with `n d_n`.
pub fn asymptotic_extremiser_scan(n_list: &[usize], cfg: &QuadratureConfig) -> Result<AsymptoticScan> {
    if let Some(&n) = n_list.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidConfig(format!("every n must be >= 3, got {n}")));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let estimates: Vec<Result<VolumeEstimate>> =
        ns.par_iter().map(|&n| volume_quadrature(&Direction::uniform(n), cfg)).collect();
    let mut rows: Vec<AsymptoticRow> = Vec::with_capacity(ns.len());
    for (&n, est) in ns.iter().zip(estimates) {
        let est = est?;
        let deficit = 2.0 - est.value;
        let scaled = n as f64 * deficit;
        let ratio = rows.last().map(|p| scaled / p.scaled_deficit);
        let oracle_diff = (n == 3)
            .then(|| volume_closed_form_n3(&Direction::uniform(3)).map(|v| (v - est.value).abs()))
            .transpose()?;
        rows.push(AsymptoticRow {
            n,
            value: est.value,
            error: est.error,
            deficit,
            scaled_deficit: scaled,
            ratio,
            oracle_diff,
        });
    }
    let deficits_positive = rows.iter().all(|r| r.deficit > r.error);
    let tail = rows.len().saturating_sub(2);
    let (lo, hi) = ASYMPTOTIC_RATIO_WINDOW;
    let stabilized = rows[tail..]
        .iter()
        .filter_map(|r| r.ratio)
        .all(|q| (lo..=hi).contains(&q));
    let monotone_increasing = rows.windows(2).all(|w| w[1].value > w[0].value);
    Ok(AsymptoticScan {
        pass: deficits_positive && stabilized,
        rows,
        ratio_window: ASYMPTOTIC_RATIO_WINDOW,
        deficits_positive,
        stabilized,
        monotone_increasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearExtremiserRow {
    pub epsilon: f64,
    pub a1: f64,
    pub a2: f64,
    pub value: f64,
    pub deficit: f64,
    pub delta: f64,
    pub ratio: f64,
    /// `None` for `epsilon > NEAR_EPS_MAX`, where the ratio is not checked.
    pub in_window: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearExtremiserScan {
    pub rows: Vec<NearExtremiserRow>,
    pub ratio_window: (f64, f64),
    pub pass: bool,
}

/// The deficit `2 - (1/2 + eps)^-1 = 4 eps / (1 + 2 eps)`, so `deficit / eps` lies in
/// `(10/3, 4)` for `eps <= 0.1`.
pub const NEAR_RATIO_WINDOW: (f64, f64) = (1.0, 4.0);
pub const NEAR_EPS_MAX: f64 = 0.1;

/// Tabulates `A_2` along `(sqrt(1/2 + eps), sqrt(1/2 - eps))`.
pub fn near_extremiser_scan(epsilons: &[f64]) -> Result<NearExtremiserScan> {
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1/2), got {eps}")));
        }
        let a = canonicalize(&[(0.5 + eps).sqrt(), (0.5 - eps).sqrt()])?;
        let value = volume_auto(&a, &QuadratureConfig::default())?.value;
        let deficit = 2.0 - value;
        let ratio = deficit / eps;
        let (lo, hi) = NEAR_RATIO_WINDOW;
        rows.push(NearExtremiserRow {
            epsilon: eps,
            a1: a.a1(),
            a2: a.a2(),
            value,
            deficit,
            delta: bounds::delta(&a)?,
            ratio,
            in_window: (eps <= NEAR_EPS_MAX).then(|| (lo..=hi).contains(&ratio)),
        });
    }
    Ok(NearExtremiserScan {
        pass: rows.iter().all(|r| r.in_window != Some(false)),
        rows,
        ratio_window: NEAR_RATIO_WINDOW,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiRow {
    pub s: f64,
    pub value: f64,
    pub error: f64,
    /// `1 - (s-2)^2 / 12`, where it applies.
    pub near_branch: Option<f64>,
    /// `1 - 1 / (151 s)`, where it applies.
    pub far_branch: Option<f64>,
    pub below_branch: bool,
    pub below_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiScan {
    pub rows: Vec<PsiRow>,
    pub pass: bool,
}

/// Checks `Psi(s) <= min(1, branch bound) + error + SLACK_FLOOR` on a grid.
pub fn psi_scan(s_grid: &[f64], cfg: &QuadratureConfig) -> Result<PsiScan> {
    if let Some(&s) = s_grid.iter().find(|&&s| !(s >= 2.0)) {
        return Err(Error::Domain(format!("psi scan needs s >= 2, got {s}")));
    }
    let values: Vec<Result<crate::psi::PsiValue>> = s_grid.par_iter().map(|&s| psi(s, cfg)).collect();
    let mut rows = Vec::with_capacity(s_grid.len());
    for (&s, p) in s_grid.iter().zip(values) {
        let p = p?;
        let near = (s <= 8.0 / 3.0).then(|| 1.0 - (s - 2.0).powi(2) / 12.0);
        let far = (s >= 8.0 / 3.0).then(|| 1.0 - 1.0 / (151.0 * s));
        let tol = p.error + SLACK_FLOOR;
        rows.push(PsiRow {
            s,
            value: p.value,
            error: p.error,
            near_branch: near,
            far_branch: far,
            below_branch: [near, far].iter().flatten().all(|&b| p.value <= b + tol),
            below_one: p.value <= 1.0 + tol,
        });
    }
    Ok(PsiScan {
        pass: rows.iter().all(|r| r.below_branch && r.below_one),
        rows,
    })
}

/// Evenly spaced grid of `count` points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRow {
    pub nominal_distance: f64,
    pub n: usize,
    pub distance: f64,
    pub value_a: f64,
    pub value_b: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzScan {
    pub rows: Vec<LipschitzRow>,
    pub violations: usize,
}

/// Random pairs `(a, b)` at nominal distances, `a` uniform on the sphere with
/// `n` cycling through `n_values`, `b` a tangent perturbation of `a` renormalised.
pub fn lipschitz_scan(
    n_values: &[usize],
    distances: &[f64],
    pairs_per_distance: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<LipschitzScan> {
    if n_values.is_empty() || n_values.iter().any(|&n| n < 2) {
        return Err(Error::InvalidConfig("n_values must be nonempty with n >= 2".into()));
    }
    let jobs: Vec<(usize, f64)> = distances
        .iter()
        .flat_map(|&d| (0..pairs_per_distance).map(move |i| (i, d)))
        .collect();
    let rows: Vec<Result<LipschitzRow>> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, d))| {
            let n = n_values[i % n_values.len()];
            let a = sample_direction(Sampler::UniformSphere, n, k, 0, seed ^ LIPSCHITZ_SALT);
            let mut rng = StreamKey::new(seed ^ LIPSCHITZ_SALT, u64::MAX).item(k as u64);
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let dot: f64 = g.iter().zip(a.weights()).map(|(x, y)| x * y).sum();
            let t: Vec<f64> = g.iter().zip(a.weights()).map(|(x, y)| x - dot * y).collect();
            let tn = t.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let raw: Vec<f64> = a.weights().iter().zip(&t).map(|(x, y)| x + d * y / tn).collect();
            let b = canonicalize(&raw)?;
            let va = volume_auto(&a, cfg)?;
            let vb = volume_auto(&b, cfg)?;
            let slack = va.error + vb.error + SLACK_FLOOR;
            let distance = a.distance(&b)?;
            Ok(LipschitzRow {
                nominal_distance: d,
                n,
                distance,
                value_a: va.value,
                value_b: vb.value,
                slack,
                pass: bounds::lipschitz_check(&a, &b, va.value, vb.value, slack)?,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(LipschitzScan {
        violations: rows.iter().filter(|r| !r.pass).count(),
        rows,
    })
}
