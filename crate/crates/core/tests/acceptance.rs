//! Acceptance criteria AC1 to AC14, one `PASS`/`FAIL` line each.
//!
//! Runs without the libtest harness so the lines are never captured; the
//! process exits nonzero when any criterion fails. Tolerances and runtime
//! limits are pinned below.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use polyslice::bounds;
use polyslice::harness::{self, Sampler, Status, SweepConfig, VerificationReport};
use polyslice::{
    canonicalize, psi, volume_auto, volume_closed_form_n3, volume_monte_carlo, volume_quadrature, Direction,
    QuadratureConfig,
};

const SEED: u64 = 20_240_601;

const AC1_TOL: f64 = 1e-8;
const AC1_ENGINE_TOL: f64 = 1e-9;
const AC1_LIMIT: Duration = Duration::from_secs(30);
const AC2_AUTO_TOL: f64 = 1e-10;
const AC2_PADDED_TOL: f64 = 1e-5;
const AC2_PAD: f64 = 1e-6;
const AC3_TOL: f64 = 1e-7;
const AC3_LIMIT: Duration = Duration::from_secs(120);
const AC4_SAMPLES: u64 = 1_000_000;
const AC4_SIGMAS: f64 = 4.0;
const AC4_MIN_AGREE: usize = 95;
const AC4_LIMIT: Duration = Duration::from_secs(600);
const SWEEP_PER_N: usize = 1430;
const SWEEP_ENGINE_TOL: f64 = 1e-7;
const SWEEP_FLOOR: f64 = 1e-6;
const AC8_PSI2_TOL: f64 = 1e-6;
const AC8_TOL: f64 = 1e-6;
const AC8_LIMIT: Duration = Duration::from_secs(120);
const AC10_AGG_TOL: f64 = 1e-12;
const AC11_DISTANCES: [f64; 3] = [1e-1, 1e-2, 1e-3];
const AC11_PAIRS_PER_DISTANCE: usize = 167;
const AC12_LIMIT: Duration = Duration::from_secs(300);
const AC12_WINDOW: (f64, f64) = (0.75, 1.33);
const AC13_TOL: f64 = 1e-12;
const AC13_CEILING: f64 = 2.0 - 1e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit: Duration) -> String {
    format!("{:.1}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs())
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::with_tol(AC1_ENGINE_TOL);
    let mut worst: f64 = 0.0;
    for eps in harness::linear_grid(0.0, 0.49, 50) {
        let a = canonicalize(&[(0.5 + eps).sqrt(), (0.5 - eps).sqrt()]).unwrap();
        match volume_quadrature(&a, &cfg) {
            Ok(v) => worst = worst.max((v.value - 1.0 / (a.a1() * a.a1())).abs()),
            Err(e) => return outcome(false, format!("eps={eps}: {e}")),
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= AC1_TOL && t < AC1_LIMIT,
        format!("max |diff| = {worst:.3e} (tol {AC1_TOL:e}), {}", within(t, AC1_LIMIT)),
    )
}

fn ac2() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut worst_auto: f64 = 0.0;
    for n in 2..=8 {
        match volume_auto(&Direction::e1(n), &cfg) {
            Ok(v) => worst_auto = worst_auto.max((v.value - 1.0).abs()),
            Err(e) => return outcome(false, format!("n={n}: {e}")),
        }
    }
    let padded_cfg = QuadratureConfig::with_tol(1e-6);
    let padded: Vec<Result<f64, String>> = (2..=8usize)
        .into_par_iter()
        .map(|n| {
            let mut raw = vec![AC2_PAD; n];
            raw[0] = 1.0;
            let a = canonicalize(&raw).map_err(|e| e.to_string())?;
            volume_quadrature(&a, &padded_cfg)
                .map(|v| (v.value - 1.0).abs())
                .map_err(|e| format!("padded n={n}: {e}"))
        })
        .collect();
    let mut worst_pad: f64 = 0.0;
    for p in padded {
        match p {
            Ok(d) => worst_pad = worst_pad.max(d),
            Err(e) => return outcome(false, e),
        }
    }
    outcome(
        worst_auto <= AC2_AUTO_TOL && worst_pad <= AC2_PADDED_TOL,
        format!(
            "auto max |A - 1| = {worst_auto:.3e} (tol {AC2_AUTO_TOL:e}), padded max |A - 1| = {worst_pad:.3e} (tol {AC2_PADDED_TOL:e})"
        ),
    )
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let diffs: Vec<Result<f64, String>> = (0..100)
        .into_par_iter()
        .map(|i| {
            let a = harness::sample_direction(Sampler::UniformSphere, 3, i, 100, SEED);
            let q = volume_quadrature(&a, &cfg).map_err(|e| e.to_string())?;
            let c = volume_closed_form_n3(&a).map_err(|e| e.to_string())?;
            Ok((q.value - c).abs())
        })
        .collect();
    let mut worst: f64 = 0.0;
    for d in diffs {
        match d {
            Ok(d) => worst = worst.max(d),
            Err(e) => return outcome(false, e),
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= AC3_TOL && t < AC3_LIMIT,
        format!("max |quad - closed| = {worst:.3e} (tol {AC3_TOL:e}), {}", within(t, AC3_LIMIT)),
    )
}

fn ac4() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [3usize, 5, 8] {
        let agree: Result<usize, String> = (0..100usize)
            .map(|i| {
                let a = harness::sample_direction(Sampler::UniformSphere, n, i, 100, SEED ^ 0xAC4);
                let q = volume_quadrature(&a, &cfg).map_err(|e| e.to_string())?;
                let m = volume_monte_carlo(&a, AC4_SAMPLES, SEED.wrapping_add(i as u64)).map_err(|e| e.to_string())?;
                Ok(usize::from((q.value - m.value).abs() <= AC4_SIGMAS * m.error + q.error))
            })
            .sum();
        match agree {
            Ok(k) => {
                pass &= k >= AC4_MIN_AGREE;
                parts.push(format!("n={n}: {k}/100"));
            }
            Err(e) => return outcome(false, format!("n={n}: {e}")),
        }
    }
    let t = start.elapsed();
    outcome(
        pass && t < AC4_LIMIT,
        format!("{} agree (need {AC4_MIN_AGREE}), {}", parts.join(", "), within(t, AC4_LIMIT)),
    )
}

fn sweep_config() -> SweepConfig {
    SweepConfig {
        n_values: (2..=8).collect(),
        directions_per_n: SWEEP_PER_N,
        sampler: Sampler::UniformSphere,
        seed: SEED,
        engine_tolerances: QuadratureConfig::with_tol(SWEEP_ENGINE_TOL),
        mc_samples: 0,
        inject_failure: false,
    }
}

fn fallbacks(report: &VerificationReport) -> usize {
    report.records.iter().filter(|r| r.note.is_some()).count()
}

fn ac5(report: &VerificationReport) -> Outcome {
    let bad = report
        .records
        .iter()
        .filter(|r| !(r.engine.value >= 1.0 - SWEEP_FLOOR && r.engine.value <= 2.0 + SWEEP_FLOOR))
        .count();
    let lo = report.records.iter().map(|r| r.engine.value).fold(f64::INFINITY, f64::min);
    let hi = report.records.iter().map(|r| r.engine.value).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        bad == 0 && report.records.len() >= 10_000 && fallbacks(report) == 0,
        format!(
            "{} directions, values in [{lo:.9}, {hi:.9}], {bad} outside, {} engine fallbacks",
            report.records.len(),
            fallbacks(report)
        ),
    )
}

fn ac6(report: &VerificationReport) -> Outcome {
    let bad = report
        .records
        .iter()
        .filter(|r| r.engine.value > r.bounds.theorem1_upper + SWEEP_FLOOR)
        .count();
    let fails = report.summary.checks.iter().find(|c| c.check == "theorem1").map_or(0, |c| c.fail);
    outcome(bad == 0 && fails == 0, format!("{bad} violations of A <= upper + {SWEEP_FLOOR:e}"))
}

fn ac7(report: &VerificationReport) -> Outcome {
    let bad = report
        .records
        .iter()
        .filter(|r| r.engine.value < r.bounds.lower_stability - SWEEP_FLOOR)
        .count();
    let worst = report
        .records
        .iter()
        .map(|r| r.engine.value - r.bounds.lower_stability)
        .fold(f64::INFINITY, f64::min);
    outcome(bad == 0, format!("{bad} violations, smallest A - lower = {worst:.3e}"))
}

fn ac8() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::with_tol(1e-7);
    let p2 = match psi(2.0, &cfg) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    let scan = match harness::psi_scan(&harness::linear_grid(2.0, 60.0, 60), &cfg) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut worst = f64::INFINITY;
    for r in &scan.rows {
        let cap = bounds::psi_quant_bound(r.s).map_or(1.0, |b| b.min(1.0));
        worst = worst.min(cap + AC8_TOL - r.value);
    }
    let t = start.elapsed();
    let d2 = (p2.value - 1.0).abs();
    outcome(
        d2 <= AC8_PSI2_TOL && worst >= 0.0 && scan.rows.len() == 60 && t < AC8_LIMIT,
        format!(
            "|Psi(2) - 1| = {d2:.3e}, worst margin on 60-point grid = {worst:.3e}, {}",
            within(t, AC8_LIMIT)
        ),
    )
}

fn ac9(report: &VerificationReport) -> Outcome {
    let threshold = bounds::small_weights_threshold();
    let eligible: Vec<_> = report.records.iter().filter(|r| r.direction[0] <= threshold).collect();
    let mut evaluated = 0;
    let mut bad = 0;
    for r in &eligible {
        let c = r.check("fourier_product").expect("check present");
        match c.status {
            Status::Pass => evaluated += 1,
            Status::Fail => {
                evaluated += 1;
                bad += 1;
            }
            _ => bad += 1,
        }
    }
    outcome(
        bad == 0 && !eligible.is_empty(),
        format!("{} eligible directions, {evaluated} evaluated, {bad} violations or gaps", eligible.len()),
    )
}

fn ac10(report: &VerificationReport) -> Outcome {
    let mut uncovered = 0;
    let mut bound_fail = 0;
    let mut agg_fail = 0;
    let mut agg_checked = 0;
    for r in &report.records {
        if r.n >= 3 && r.regions.is_empty() {
            uncovered += 1;
        }
        if let Some(b) = r.bounds.min_region_bound {
            let slack = r.engine.error + harness::BOUND_EVAL_ERROR + SWEEP_FLOOR;
            if r.engine.value > b + slack {
                bound_fail += 1;
            }
            if r.bounds.delta > bounds::L7_DELTA_MAX {
                agg_checked += 1;
                if b > r.bounds.aggregation_target + AC10_AGG_TOL {
                    agg_fail += 1;
                }
            }
        }
    }
    outcome(
        uncovered == 0 && bound_fail == 0 && agg_fail == 0,
        format!(
            "{uncovered} uncovered (n >= 3), {bound_fail} region-bound violations, {agg_fail}/{agg_checked} aggregation violations"
        ),
    )
}

fn ac11() -> Outcome {
    let cfg = QuadratureConfig::default();
    let ns: Vec<usize> = (2..=8).collect();
    match harness::lipschitz_scan(&ns, &AC11_DISTANCES, AC11_PAIRS_PER_DISTANCE, SEED, &cfg) {
        Ok(scan) => outcome(
            scan.violations == 0 && scan.rows.len() >= 500,
            format!("{} pairs, {} violations", scan.rows.len(), scan.violations),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn ac12() -> Outcome {
    let start = Instant::now();
    let scan = match harness::asymptotic_extremiser_scan(&[16, 32, 64], &QuadratureConfig::default()) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let t = start.elapsed();
    let positive = scan.rows.iter().all(|r| r.deficit > 0.0);
    let ratios: Vec<f64> = scan.rows.iter().filter_map(|r| r.ratio).collect();
    let in_window = ratios.len() == 2 && ratios.iter().all(|q| (AC12_WINDOW.0..=AC12_WINDOW.1).contains(q));
    let nd: Vec<String> = scan.rows.iter().map(|r| format!("{:.6}", r.scaled_deficit)).collect();
    outcome(
        positive && in_window && t < AC12_LIMIT,
        format!(
            "n d_n = [{}], ratios {:?}, {}",
            nd.join(", "),
            ratios.iter().map(|q| format!("{q:.4}")).collect::<Vec<_>>(),
            within(t, AC12_LIMIT)
        ),
    )
}

fn ac13() -> Outcome {
    let g = bounds::gaussian_comparison(FRAC_1_SQRT_2).unwrap();
    let expect = 2.0 * (1.0 - (-2.0f64).exp());
    let be = bounds::berry_esseen_bound(bounds::small_weights_threshold(), 6e-5).unwrap();
    outcome(
        (g - expect).abs() <= AC13_TOL && be < AC13_CEILING,
        format!(
            "gaussian = {g:.15} (|diff| {:.1e}), berry-esseen = {be:.9} < {AC13_CEILING}",
            (g - expect).abs()
        ),
    )
}

fn ac14() -> Outcome {
    let cfg = SweepConfig {
        directions_per_n: 150,
        mc_samples: 20_000,
        ..sweep_config()
    };
    let first = harness::sweep(&cfg).and_then(|r| r.without_timing().to_json());
    // A single-thread rerun must not change a byte either.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let second = pool.install(|| harness::sweep(&cfg)).and_then(|r| r.without_timing().to_json());
    let third = harness::sweep(&cfg).and_then(|r| r.without_timing().to_json());
    match (first, second, third) {
        (Ok(a), Ok(b), Ok(c)) => outcome(
            a == b && a == c,
            format!("3 runs of {} bytes, identical: {}", a.len(), a == b && a == c),
        ),
        _ => outcome(false, "sweep failed".into()),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report_line = |id: &'static str, o: Outcome| {
        println!("{id} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, o));
    };
    report_line("AC01 closed form n=2      ", ac1());
    report_line("AC02 canonical section    ", ac2());
    report_line("AC03 n=3 oracle           ", ac3());
    report_line("AC04 monte carlo          ", ac4());

    let start = Instant::now();
    let report = harness::sweep(&sweep_config()).expect("sweep config is valid");
    println!(
        "     sweep: {} directions in {:.1}s, {} failed checks",
        report.records.len(),
        start.elapsed().as_secs_f64(),
        report.summary.failed_checks
    );
    report_line("AC05 slicing range        ", ac5(&report));
    report_line("AC06 upper bound          ", ac6(&report));
    report_line("AC07 lower stability      ", ac7(&report));
    report_line("AC08 psi values           ", ac8());
    report_line("AC09 product bound        ", ac9(&report));
    report_line("AC10 region machinery     ", ac10(&report));
    report_line("AC11 lipschitz            ", ac11());
    report_line("AC12 asymptotic extremiser", ac12());
    report_line("AC13 gaussian comparison  ", ac13());
    report_line("AC14 determinism          ", ac14());

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(id, _)| id.trim()).collect();
    println!("{}/{} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join("; "));
        ExitCode::FAILURE
    }
}
