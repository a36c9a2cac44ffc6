//! `polyslice`: section volumes, bounds and verification scans from the shell.
//!
//! Exit codes: 0 when everything ran and every check passed, 1 when a
//! verification check failed, 2 on usage, domain or engine errors.

mod format;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polyslice::bounds::{self, RegionAssignment, StabilityBounds};
use polyslice::harness::{self, Sampler, Status, SweepConfig, VerificationReport};
use polyslice::{canonicalize, Direction, PsiValue, QuadratureConfig, VolumeEstimate};

use format::{num, opt};

const DEFAULT_VOLUME_TOL: f64 = 1e-8;
const DEFAULT_PSI_TOL: f64 = 1e-7;

#[derive(Parser, Debug)]
#[command(name = "polyslice", version, about = "Hyperplane sections of the complex polydisc")]
struct Cli {
    /// Output serialization.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH", global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Quad,
    Mc,
    Closed,
    Auto,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Section volume A_n(a) of one direction.
    Volume(VolumeArgs),
    /// Psi(s) = (s/4) int |2 J1(t)/t|^s t dt.
    Psi(PsiArgs),
    /// Regions containing a direction and their bounds.
    Classify(DirectionArgs),
    /// All closed-form bounds at a direction.
    Bounds(BoundsArgs),
    /// Randomised verification sweep.
    Sweep(SweepArgs),
    /// n d_n along the uniform directions (1/sqrt n, ..., 1/sqrt n).
    ScanAsymptotic(ScanAsymptoticArgs),
    /// Psi against its piecewise bound on a grid of s.
    ScanPsi(ScanPsiArgs),
    /// Deficit along (sqrt(1/2 + eps), sqrt(1/2 - eps)).
    ScanNearExtremiser(ScanNearArgs),
}

#[derive(Args, Debug)]
struct DirectionArgs {
    /// Comma-separated weights; canonicalized on entry.
    #[arg(long, value_name = "LIST", value_parser = parse_reals, allow_hyphen_values = true)]
    direction: Option<Reals>,
    /// Dimension; alone it selects (1/sqrt n, ..., 1/sqrt n).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct VolumeArgs {
    #[command(flatten)]
    dir: DirectionArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_VOLUME_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct PsiArgs {
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = DEFAULT_PSI_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    dir: DirectionArgs,
    /// Tolerance of the Psi evaluations inside the product bound.
    #[arg(long, default_value_t = DEFAULT_PSI_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
    n: Vec<usize>,
    /// Directions per dimension.
    #[arg(long, default_value_t = 100)]
    directions: usize,
    /// uniform_sphere, dirichlet_squares, grid_2d or special_vectors.
    #[arg(long, value_parser = parse_sampler, default_value = "uniform_sphere")]
    sampler: Sampler,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_VOLUME_TOL)]
    tol: f64,
    /// Monte Carlo cross-check samples per direction; 0 disables the check.
    #[arg(long, default_value_t = 0)]
    mc_samples: u64,
    /// Test hook: violate one bound on purpose.
    #[arg(long, hide = true)]
    inject_failure: bool,
}

#[derive(Args, Debug)]
struct ScanAsymptoticArgs {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    n: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_VOLUME_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ScanPsiArgs {
    /// Either a comma list or `lo:hi:count`.
    #[arg(long, value_parser = parse_grid, default_value = "2:60:60")]
    grid: Reals,
    #[arg(long, default_value_t = DEFAULT_PSI_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ScanNearArgs {
    /// Values of eps; either a comma list or `lo:hi:count`.
    #[arg(long, value_parser = parse_grid, default_value = "0.1,0.05,0.02,0.01,0.005,0.001")]
    grid: Reals,
}

/// A parsed list of reals; a newtype so clap treats it as one value.
#[derive(Clone, Debug)]
struct Reals(Vec<f64>);

fn parse_reals(s: &str) -> Result<Reals, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("{t:?} is not a real number: {e}"))
        })
        .collect::<Result<_, _>>()
        .map(Reals)
}

fn parse_grid(s: &str) -> Result<Reals, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, count] => {
            let lo: f64 = lo.trim().parse().map_err(|e| format!("bad grid start: {e}"))?;
            let hi: f64 = hi.trim().parse().map_err(|e| format!("bad grid end: {e}"))?;
            let count: usize = count.trim().parse().map_err(|e| format!("bad grid count: {e}"))?;
            if count == 0 || !(hi >= lo) {
                return Err("grid needs count >= 1 and hi >= lo".into());
            }
            Ok(Reals(harness::linear_grid(lo, hi, count)))
        }
        [_] => parse_reals(s),
        _ => Err("grid is `lo:hi:count` or a comma list".into()),
    }
}

fn parse_sampler(s: &str) -> Result<Sampler, String> {
    s.parse().map_err(|e: polyslice::Error| e.to_string())
}

/// Rendered output plus whether every verification check passed.
struct Outcome {
    text: String,
    passed: bool,
}

/// Errors that exit 2.
struct Failure(String);

impl From<polyslice::Error> for Failure {
    fn from(e: polyslice::Error) -> Self {
        Failure(e.to_string())
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(Failure(msg)) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn configure_threads() -> Run<()> {
    let Ok(raw) = std::env::var("POLYSLICE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure(format!("POLYSLICE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure(e.to_string()))
}

fn run(cli: &Cli) -> Run<Outcome> {
    let f = cli.format;
    match &cli.command {
        Command::Volume(a) => cmd_volume(a, f),
        Command::Psi(a) => cmd_psi(a, f),
        Command::Classify(a) => cmd_classify(a, f),
        Command::Bounds(a) => cmd_bounds(a, f),
        Command::Sweep(a) => cmd_sweep(a, f),
        Command::ScanAsymptotic(a) => cmd_scan_asymptotic(a, f),
        Command::ScanPsi(a) => cmd_scan_psi(a, f),
        Command::ScanNearExtremiser(a) => cmd_scan_near(a, f),
    }
}

fn quad_cfg(tol: f64) -> Run<QuadratureConfig> {
    let cfg = QuadratureConfig::with_tol(tol);
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_direction(args: &DirectionArgs) -> Run<Direction> {
    match (&args.direction, args.n) {
        (Some(Reals(raw)), n) => {
            if let Some(n) = n.filter(|&n| n != raw.len()) {
                return Err(Failure(format!("--n {n} disagrees with --direction of length {}", raw.len())));
            }
            let a = canonicalize(raw)?;
            let same = a.weights().iter().zip(raw).all(|(x, y)| x.to_bits() == y.to_bits());
            if !same {
                let shown: Vec<String> = a.weights().iter().map(|&x| num(x)).collect();
                eprintln!("note: direction canonicalized to ({})", shown.join(", "));
            }
            Ok(a)
        }
        (None, Some(n)) if n >= 1 => Ok(Direction::uniform(n)),
        (None, Some(_)) => Err(Failure("--n must be >= 1".into())),
        (None, None) => Err(Failure("one of --direction or --n is required".into())),
    }
}

fn to_json<T: Serialize>(value: &T) -> Run<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure(e.to_string()))
}

fn to_csv<T: Serialize>(rows: &[T]) -> Run<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure(e.to_string()))
}

fn done(text: String) -> Run<Outcome> {
    Ok(Outcome { text, passed: true })
}

fn weights_text(a: &Direction) -> String {
    a.weights().iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
}

#[derive(Serialize)]
struct VolumeOutput {
    direction: Vec<f64>,
    #[serde(flatten)]
    estimate: VolumeEstimate,
}

fn cmd_volume(args: &VolumeArgs, f: Format) -> Run<Outcome> {
    let cfg = quad_cfg(args.tol)?;
    if args.method == MethodArg::Mc && args.samples == 0 {
        return Err(Failure("--samples must be >= 1".into()));
    }
    let a = resolve_direction(&args.dir)?;
    let est = match args.method {
        MethodArg::Auto => polyslice::volume_auto(&a, &cfg)?,
        MethodArg::Quad => polyslice::volume_quadrature(&a, &cfg)?,
        MethodArg::Mc => polyslice::volume_monte_carlo(&a, args.samples, args.seed)?,
        MethodArg::Closed => {
            let k = a.nonzero().len();
            if k > 3 {
                return Err(Failure(format!(
                    "closed form needs at most 3 nonzero weights, got {k}"
                )));
            }
            // Up to two nonzero weights the automatic dispatch is already exact.
            let est = polyslice::volume_auto(&a, &cfg)?;
            if k == 3 && est.method != polyslice::Method::ClosedForm {
                return Err(Failure("closed form unavailable for this direction".into()));
            }
            est
        }
    };
    let out = VolumeOutput {
        direction: a.weights().to_vec(),
        estimate: est,
    };
    match f {
        Format::Json => done(to_json(&out)?),
        Format::Csv => done(to_csv(&[VolumeCsv::from(&out)])?),
        Format::Text => done(format!(
            "{}\nerror    {}\nmethod   {}\ncount    {}\ndirection ({})\n",
            num(est.value),
            num(est.error),
            est.method,
            est.samples_or_panels,
            weights_text(&a)
        )),
    }
}

#[derive(Serialize)]
struct VolumeCsv {
    weights: String,
    method: polyslice::Method,
    value: f64,
    error: f64,
    samples_or_panels: u64,
}

impl From<&VolumeOutput> for VolumeCsv {
    fn from(o: &VolumeOutput) -> Self {
        Self {
            weights: o.direction.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";"),
            method: o.estimate.method,
            value: o.estimate.value,
            error: o.estimate.error,
            samples_or_panels: o.estimate.samples_or_panels,
        }
    }
}

fn cmd_psi(args: &PsiArgs, f: Format) -> Run<Outcome> {
    let cfg = quad_cfg(args.tol)?;
    let p: PsiValue = polyslice::psi(args.s, &cfg)?;
    match f {
        Format::Json => done(to_json(&p)?),
        Format::Csv => done(to_csv(&[p])?),
        Format::Text => done(format!("{} ± {}\n", num(p.value), num(p.error))),
    }
}

#[derive(Serialize)]
struct ClassifyOutput {
    direction: Vec<f64>,
    #[serde(flatten)]
    regions: RegionAssignment,
    min_bound: Option<f64>,
    aggregation_target: f64,
}

fn cmd_classify(args: &DirectionArgs, f: Format) -> Run<Outcome> {
    let a = resolve_direction(args)?;
    let regions = bounds::classify_region(&a)?;
    let out = ClassifyOutput {
        direction: a.weights().to_vec(),
        min_bound: regions.min_bound(),
        aggregation_target: bounds::aggregation_target(&a)?,
        regions,
    };
    match f {
        Format::Json => done(to_json(&out)?),
        Format::Csv => done(to_csv(&out.regions.applicable)?),
        Format::Text => {
            let mut s = String::new();
            for r in &out.regions.applicable {
                let _ = writeln!(s, "{:<4} {}", r.tag, num(r.bound));
            }
            if out.regions.applicable.is_empty() {
                s.push_str("no region applies\n");
            }
            let _ = writeln!(s, "min bound          {}", opt(out.min_bound));
            let _ = writeln!(s, "delta              {}", num(out.regions.delta));
            let _ = writeln!(s, "aggregation target {}", num(out.aggregation_target));
            done(s)
        }
    }
}

#[derive(Serialize)]
struct BoundsOutput {
    direction: Vec<f64>,
    #[serde(flatten)]
    stability: StabilityBounds,
    delta: f64,
    l4_pow4: f64,
    aggregation_target: f64,
    min_region_bound: Option<f64>,
    /// Two-dimensional comparison bounds, when `0 < a_1 < 1`.
    gaussian_comparison: Option<f64>,
    berry_esseen_upper: Option<f64>,
}

fn cmd_bounds(args: &BoundsArgs, f: Format) -> Run<Outcome> {
    let cfg = quad_cfg(args.tol)?;
    let a = resolve_direction(&args.dir)?;
    let stability = bounds::stability_bounds(&a, &cfg)?;
    let a1 = a.a1();
    let two_d = a1 > 0.0 && a1 < 1.0;
    let out = BoundsOutput {
        direction: a.weights().to_vec(),
        stability,
        delta: bounds::delta(&a)?,
        l4_pow4: a.l4_pow4(),
        aggregation_target: bounds::aggregation_target(&a)?,
        min_region_bound: bounds::classify_region(&a)?.min_bound(),
        gaussian_comparison: if two_d { Some(bounds::gaussian_comparison(a1)?) } else { None },
        berry_esseen_upper: if two_d { Some(bounds::berry_esseen_upper(&a)?) } else { None },
    };
    let fp = out.stability.fourier_product.is_finite().then_some(out.stability.fourier_product);
    match f {
        Format::Json => done(to_json(&out)?),
        Format::Csv => done(to_csv(&[BoundsCsv {
            theorem1_upper: out.stability.upper_thm1,
            lower_stability: out.stability.lower_stab,
            fourier_product_upper: fp,
            lipschitz_constant: out.stability.lipschitz_constant,
            delta: out.delta,
            l4_pow4: out.l4_pow4,
            aggregation_target: out.aggregation_target,
            min_region_bound: out.min_region_bound,
            gaussian_comparison: out.gaussian_comparison,
            berry_esseen_upper: out.berry_esseen_upper,
        }])?),
        Format::Text => {
            let mut s = String::new();
            let rows = [
                ("theorem1_upper", Some(out.stability.upper_thm1)),
                ("lower_stability", Some(out.stability.lower_stab)),
                ("fourier_product_upper", fp),
                ("lipschitz_constant", Some(out.stability.lipschitz_constant)),
                ("delta", Some(out.delta)),
                ("l4_pow4", Some(out.l4_pow4)),
                ("aggregation_target", Some(out.aggregation_target)),
                ("min_region_bound", out.min_region_bound),
                ("gaussian_comparison", out.gaussian_comparison),
                ("berry_esseen_upper", out.berry_esseen_upper),
            ];
            for (k, v) in rows {
                let _ = writeln!(s, "{k:<22} {}", opt(v));
            }
            done(s)
        }
    }
}

#[derive(Serialize)]
struct BoundsCsv {
    theorem1_upper: f64,
    lower_stability: f64,
    fourier_product_upper: Option<f64>,
    lipschitz_constant: f64,
    delta: f64,
    l4_pow4: f64,
    aggregation_target: f64,
    min_region_bound: Option<f64>,
    gaussian_comparison: Option<f64>,
    berry_esseen_upper: Option<f64>,
}

fn cmd_sweep(args: &SweepArgs, f: Format) -> Run<Outcome> {
    let cfg = SweepConfig {
        n_values: args.n.clone(),
        directions_per_n: args.directions,
        sampler: args.sampler,
        seed: args.seed,
        engine_tolerances: QuadratureConfig::with_tol(args.tol),
        mc_samples: args.mc_samples,
        inject_failure: args.inject_failure,
    };
    cfg.validate()?;
    let report = harness::sweep(&cfg)?;
    let passed = report.passed();
    let text = match f {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| Failure(e.to_string()))?
        }
        Format::Text => sweep_text(&report),
    };
    Ok(Outcome { text, passed })
}

fn sweep_text(report: &VerificationReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "records {}  passed {}  failed checks {}  runtime {} s",
        s.records,
        s.passed_records,
        s.failed_checks,
        num(s.runtime_seconds)
    );
    let _ = writeln!(
        out,
        "{:<16} {:>6} {:>6} {:>6} {:>6} {:>20} {:>6}",
        "check", "pass", "fail", "n/a", "warn", "worst margin", "at"
    );
    for c in &s.checks {
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>6} {:>6} {:>6} {:>20} {:>6}",
            c.check,
            c.pass,
            c.fail,
            c.not_applicable,
            c.warn,
            opt(c.worst_margin),
            c.worst_index.map_or_else(|| "-".into(), |i| i.to_string())
        );
    }
    for r in report.records.iter().filter(|r| !r.passed()) {
        let failed: Vec<&str> = r
            .checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.check.as_str())
            .collect();
        let _ = writeln!(out, "FAIL record {} (n = {}): {}", r.index, r.n, failed.join(", "));
    }
    let _ = writeln!(out, "{}", if report.passed() { "PASS" } else { "FAIL" });
    out
}

fn cmd_scan_asymptotic(args: &ScanAsymptoticArgs, f: Format) -> Run<Outcome> {
    let cfg = quad_cfg(args.tol)?;
    let scan = harness::asymptotic_extremiser_scan(&args.n, &cfg)?;
    let text = match f {
        Format::Json => to_json(&scan)?,
        Format::Csv => to_csv(&scan.rows)?,
        Format::Text => {
            let mut s = format!(
                "{:>5} {:>20} {:>20} {:>20} {:>20}\n",
                "n", "A_n", "d_n", "n d_n", "ratio"
            );
            for r in &scan.rows {
                let _ = writeln!(
                    s,
                    "{:>5} {:>20} {:>20} {:>20} {:>20}",
                    r.n,
                    num(r.value),
                    num(r.deficit),
                    num(r.scaled_deficit),
                    opt(r.ratio)
                );
            }
            let _ = writeln!(
                s,
                "ratio window [{}, {}]  monotone {}",
                num(scan.ratio_window.0),
                num(scan.ratio_window.1),
                scan.monotone_increasing
            );
            let _ = writeln!(s, "{}", if scan.pass { "PASS" } else { "FAIL" });
            s
        }
    };
    Ok(Outcome { text, passed: scan.pass })
}

fn cmd_scan_psi(args: &ScanPsiArgs, f: Format) -> Run<Outcome> {
    let cfg = quad_cfg(args.tol)?;
    let scan = harness::psi_scan(&args.grid.0, &cfg)?;
    let text = match f {
        Format::Json => to_json(&scan)?,
        Format::Csv => to_csv(&scan.rows)?,
        Format::Text => {
            let mut s = format!("{:>20} {:>20} {:>20} {:>20}  ok\n", "s", "Psi(s)", "error", "bound");
            for r in &scan.rows {
                let bound = [r.near_branch, r.far_branch].into_iter().flatten().fold(1.0, f64::min);
                let _ = writeln!(
                    s,
                    "{:>20} {:>20} {:>20} {:>20}  {}",
                    num(r.s),
                    num(r.value),
                    num(r.error),
                    num(bound),
                    r.below_branch && r.below_one
                );
            }
            let _ = writeln!(s, "{}", if scan.pass { "PASS" } else { "FAIL" });
            s
        }
    };
    Ok(Outcome { text, passed: scan.pass })
}

fn cmd_scan_near(args: &ScanNearArgs, f: Format) -> Run<Outcome> {
    let scan = harness::near_extremiser_scan(&args.grid.0)?;
    let text = match f {
        Format::Json => to_json(&scan)?,
        Format::Csv => to_csv(&scan.rows)?,
        Format::Text => {
            let mut s = format!(
                "{:>20} {:>20} {:>20} {:>20}  in window\n",
                "eps", "A_2", "deficit", "deficit/eps"
            );
            for r in &scan.rows {
                let _ = writeln!(
                    s,
                    "{:>20} {:>20} {:>20} {:>20}  {}",
                    num(r.epsilon),
                    num(r.value),
                    num(r.deficit),
                    num(r.ratio),
                    r.in_window.map_or_else(|| "-".into(), |b| b.to_string())
                );
            }
            let _ = writeln!(s, "{}", if scan.pass { "PASS" } else { "FAIL" });
            s
        }
    };
    Ok(Outcome { text, passed: scan.pass })
}
