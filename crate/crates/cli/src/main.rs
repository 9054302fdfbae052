//! Batch front-end for the perpendicular-counting machinery: load a group
//! and spectral data, build double-coset inventories, run counts, moment
//! scans, transform benchmarks and trace-formula consistency checks, and
//! emit deterministic CSV.
//!
//! Exit codes: 0 success, 2 configuration or parse failure, 3 unstable
//! inventory without --allow-unstable, 4 oracle deviation beyond tolerance.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{RunConfig, Spacing, YPolicy};
use num_complex::Complex64;
use perpcount::counting::{
    self, count, count_csv_row, format_float, geometric_side, geometric_side_oracle, main_term,
    moment_scan, parse_spectral_data, spectral_side_partial, SpectralDatum, COUNT_CSV_HEADER,
};
use perpcount::group::{coset_inventory, GroupPresentation, Inventory, InventoryOptions};
use perpcount::huber::{huber_closed, huber_numeric, JRoute};
use perpcount::special::SpectralParameter;
use perpcount::testfn::{Sign, SmoothedIndicator};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "perpcount",
    about = "Counting common perpendiculars between closed geodesics via a relative trace formula"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat-key configuration file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Counting threshold X (overrides the config file)
    #[arg(long)]
    x: Option<f64>,
    /// Smoothing policy: x23 or fixed:<width>
    #[arg(long)]
    y_policy: Option<String>,
    /// Depth cap for the coset search
    #[arg(long)]
    max_word_len: Option<usize>,
    /// Proceed with an unstable inventory (exit 3 otherwise)
    #[arg(long)]
    allow_unstable: bool,
    /// Seed for randomized spot checks
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV files
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the double-coset inventory and write it as CSV
    Inventory(CommonArgs),
    /// Count N(X), the main term and the error, over one X or an X grid
    Count(CommonArgs),
    /// Mean-square scan of the error term over [X, 2X]
    MomentScan(CommonArgs),
    /// Tabulate the spectral transform over a parameter grid
    HuberBench(CommonArgs),
    /// Per-coset line-integral oracle and transform route-agreement suite
    TraceCheck(CommonArgs),
}

enum Failure {
    Config(String),
    Unstable,
    Oracle(String),
}

impl From<perpcount::group::GroupError> for Failure {
    fn from(e: perpcount::group::GroupError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<counting::CountError> for Failure {
    fn from(e: counting::CountError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<perpcount::testfn::TestFnError> for Failure {
    fn from(e: perpcount::testfn::TestFnError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<perpcount::huber::HuberError> for Failure {
    fn from(e: perpcount::huber::HuberError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("GCC_NUM_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let result = match &cli.command {
        Command::Inventory(args) => cmd_inventory(args),
        Command::Count(args) => cmd_count(args),
        Command::MomentScan(args) => cmd_moment_scan(args),
        Command::HuberBench(args) => cmd_huber_bench(args),
        Command::TraceCheck(args) => cmd_trace_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Unstable) => {
            eprintln!("error: inventory still growing at the word-length cap (rerun with --allow-unstable to proceed)");
            ExitCode::from(3)
        }
        Err(Failure::Oracle(msg)) => {
            eprintln!("error: oracle deviation beyond tolerance: {msg}");
            ExitCode::from(4)
        }
    }
}

struct Session {
    cfg: RunConfig,
    pres: GroupPresentation,
    spectral: Vec<SpectralDatum>,
}

fn load_session(args: &CommonArgs) -> Result<Session, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    if let Some(x) = args.x {
        cfg.x = Some(x);
    }
    if let Some(policy) = &args.y_policy {
        cfg.y_policy = YPolicy::parse(policy).map_err(Failure::Config)?;
    }
    if let Some(depth) = args.max_word_len {
        cfg.max_word_len = depth;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    let group_path = cfg
        .group_file
        .clone()
        .ok_or(Failure::Config("no group_file configured".into()))?;
    let text = std::fs::read_to_string(&group_path).map_err(|e| {
        Failure::Config(format!("cannot read group file {}: {e}", group_path.display()))
    })?;
    let pres = GroupPresentation::parse(&text)?;
    let spectral = match &cfg.spectral_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Config(format!("cannot read spectral file {}: {e}", path.display()))
            })?;
            let data = parse_spectral_data(&text)?;
            validate_spectral(&cfg, &pres, &data)?;
            data
        }
        None => Vec::new(),
    };
    Ok(Session {
        cfg,
        pres,
        spectral,
    })
}

/// When the volume is configured, the constant-eigenfunction period must be
/// len(l)/(sqrt(vol)·ν).
fn validate_spectral(
    cfg: &RunConfig,
    pres: &GroupPresentation,
    data: &[SpectralDatum],
) -> Result<(), Failure> {
    if let Some(vol) = cfg.vol {
        let expected = pres.geodesic_length() / (vol.sqrt() * cfg.nu);
        let constant = data
            .iter()
            .find(|d| (d.s - Complex64::new(1.0, 0.0)).norm() < 1e-9)
            .ok_or(Failure::Config(
                "spectral data lacks the constant eigenfunction (s = 1)".into(),
            ))?;
        if (constant.period - expected).abs() > 1e-6 * expected {
            return Err(Failure::Config(format!(
                "constant-eigenfunction period {} disagrees with len/(sqrt(vol)·ν) = {}",
                constant.period, expected
            )));
        }
    }
    Ok(())
}

fn require_x(session: &Session) -> Result<f64, Failure> {
    session
        .cfg
        .x
        .ok_or(Failure::Config("no threshold x configured".into()))
}

fn build_inventory(
    session: &Session,
    coverage: f64,
    allow_unstable: bool,
) -> Result<Inventory, Failure> {
    let opts = InventoryOptions {
        prune_margin: session.cfg.prune_margin,
        ..Default::default()
    };
    let inv = coset_inventory(&session.pres, coverage, session.cfg.max_word_len, opts)?;
    if !inv.is_stable() && !allow_unstable {
        return Err(Failure::Unstable);
    }
    if !inv.is_stable() {
        eprintln!(
            "warning: inventory unstable at depth {} (coverage {})",
            inv.depth_used(),
            coverage
        );
    }
    if inv.rejected_zero_diagonal + inv.torsion_suspects + inv.foreign_diagonals > 0 {
        eprintln!(
            "warning: rejected elements during reduction: {} zero-diagonal, {} torsion-suspect, {} foreign-diagonal",
            inv.rejected_zero_diagonal, inv.torsion_suspects, inv.foreign_diagonals
        );
    }
    Ok(inv)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_inventory(args: &CommonArgs) -> Result<(), Failure> {
    let session = load_session(args)?;
    let x = require_x(&session)?;
    let coverage = x + session.cfg.y_policy.width(x);
    let inv = build_inventory(&session, coverage, args.allow_unstable)?;
    let mut csv = String::from("a,b,c,d,b_value,class,word_depth\n");
    for rep in inv.representatives() {
        let e = rep.element.entries();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            format_float(e[0]),
            format_float(e[1]),
            format_float(e[2]),
            format_float(e[3]),
            format_float(rep.b_value),
            rep.class.as_str(),
            rep.word_depth
        );
    }
    let path = write_out(&session.cfg.out_dir, "inventory.csv", &csv)?;
    println!(
        "inventory: {} representatives below coverage {} ({} regular < X, {} exceptional), depth {}, stable: {}",
        inv.representatives().len(),
        coverage,
        inv.regular_count_below(x),
        inv.exceptional_count(),
        inv.depth_used(),
        inv.is_stable()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn count_grid(session: &Session) -> Result<Vec<f64>, Failure> {
    let x = require_x(session)?;
    Ok(match session.cfg.x_max {
        Some(x_max) if x_max > x => {
            let n = session.cfg.points.max(2);
            (0..n)
                .map(|k| x * (x_max / x).powf(k as f64 / (n - 1) as f64))
                .collect()
        }
        _ => vec![x],
    })
}

fn cmd_count(args: &CommonArgs) -> Result<(), Failure> {
    let session = load_session(args)?;
    let grid = count_grid(&session)?;
    let top = grid.last().copied().unwrap();
    let inv = build_inventory(&session, top + session.cfg.y_policy.width(top), args.allow_unstable)?;
    let mut csv = String::from(COUNT_CSV_HEADER);
    csv.push('\n');
    for &x in &grid {
        let report = count(&inv, &session.spectral, x)?;
        csv.push_str(&count_csv_row(&report));
        csv.push('\n');
        if grid.len() == 1 {
            println!(
                "X = {x}: N = {}, M = {:.6} (alt normalization {:.6}), E = {:.6}",
                report.n_count, report.main_term, report.main_term_halved, report.error
            );
        }
    }
    let path = write_out(&session.cfg.out_dir, "count.csv", &csv)?;
    println!("wrote {} ({} rows)", path.display(), grid.len());
    Ok(())
}

fn cmd_moment_scan(args: &CommonArgs) -> Result<(), Failure> {
    let session = load_session(args)?;
    let x = require_x(&session)?;
    let r = session.cfg.r;
    if let Some(delta) = session.cfg.delta {
        if r as f64 * delta > x {
            return Err(Failure::Config(format!(
                "sample grid does not fit in [X, 2X]: R·δ = {} > X = {x}",
                r as f64 * delta
            )));
        }
    }
    let coverage = 2.0 * x + session.cfg.y_policy.width(2.0 * x);
    let inv = build_inventory(&session, coverage, args.allow_unstable)?;
    let scan = match session.cfg.spacing {
        Spacing::Equal => moment_scan(&inv, &session.spectral, x, r, session.cfg.delta)?,
        Spacing::Poisson => {
            let samples = poisson_samples(x, r, session.cfg.delta, session.cfg.seed)
                .map_err(Failure::Config)?;
            let min_gap = samples
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            counting::moment_scan_at(&inv, &session.spectral, &samples, min_gap)?
        }
    };
    let mut csv = String::from(COUNT_CSV_HEADER);
    csv.push('\n');
    for p in &scan.points {
        csv.push_str(&count_csv_row(p));
        csv.push('\n');
    }
    let path = write_out(&session.cfg.out_dir, "moment.csv", &csv)?;
    let normalized = scan.mean_square / (x * x.ln() * x.ln());
    println!(
        "moment scan on [{x}, {}]: R = {r}, δ = {}, (1/R)Σ|E|² = {:.6}, /(X log²X) = {:.6}",
        2.0 * x,
        scan.delta,
        scan.mean_square,
        normalized
    );
    println!("wrote {}", path.display());
    Ok(())
}

/// Uniform draws on [X, 2X] conditioned on a minimal pairwise gap
/// (rejection-sampled), sorted; the randomized alternative to the equally
/// spaced default.
fn poisson_samples(x: f64, r: usize, delta: Option<f64>, seed: u64) -> Result<Vec<f64>, String> {
    use rand::{Rng, SeedableRng};
    let gap = delta.unwrap_or(x / (4.0 * r as f64));
    if r as f64 * gap > x {
        return Err(format!("minimal gap δ = {gap} cannot host {r} points in [X, 2X]"));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut pts: Vec<f64> = (0..r).map(|_| x + rng.gen_range(0.0..x)).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[1] - w[0] > gap) {
            return Ok(pts);
        }
    }
    Err(format!(
        "could not draw {r} points with pairwise gap {gap} in [{x}, {}]",
        2.0 * x
    ))
}

fn cmd_huber_bench(args: &CommonArgs) -> Result<(), Failure> {
    let session = load_session(args)?;
    let x = require_x(&session)?;
    let y = session.cfg.y_policy.width(x);
    let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus)?;
    let mut spectral_points: Vec<Complex64> = vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.9, 0.0),
        Complex64::new(0.75, 0.0),
        Complex64::new(0.6, 0.0),
        Complex64::new(0.5, 0.0),
    ];
    let mut t = 1.0;
    while t <= session.cfg.bench_t_max {
        spectral_points.push(Complex64::new(0.5, t));
        t *= 2.0;
    }
    let mut csv = String::from("s_re,s_im,x,y,d_re,d_im,route\n");
    for s in spectral_points {
        let sp = SpectralParameter::from_s(s);
        let near_degenerate = (s - Complex64::new(0.5, 0.0)).norm() < 1e-4
            || (s - Complex64::new(1.0, 0.0)).norm() < 1e-4;
        let (d, route) = if near_degenerate {
            (huber_numeric(&ind, &sp, session.cfg.quad_tol)?, "quadrature")
        } else {
            (huber_closed(&ind, &sp)?, "transformed")
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            format_float(s.re),
            format_float(s.im),
            format_float(x),
            format_float(y),
            format_float(d.re),
            format_float(d.im),
            route
        );
    }
    let path = write_out(&session.cfg.out_dir, "huber.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_trace_check(args: &CommonArgs) -> Result<(), Failure> {
    let session = load_session(args)?;
    let x = require_x(&session)?;
    let y = session.cfg.y_policy.width(x);
    let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus)?;
    let inv = build_inventory(&session, x + y, args.allow_unstable)?;

    // per-coset line-integral oracle
    let records = geometric_side_oracle(&inv, &ind, session.cfg.quad_tol)?;
    let mut worst_coset: f64 = 0.0;
    for rec in &records {
        worst_coset = worst_coset.max(rec.deviation / (1.0 + rec.closed));
    }
    println!(
        "per-coset oracle: {} cosets, max relative deviation {:.3e} (tolerance {:.1e})",
        records.len(),
        worst_coset,
        session.cfg.oracle_tol
    );

    // geometric side against the partial spectral side
    let geo = geometric_side(&session.pres, &inv, &ind, session.cfg.quad_tol)?;
    if !session.spectral.is_empty() {
        let constant = session
            .cfg
            .period_sum_constant
            .unwrap_or(session.pres.geodesic_length() / std::f64::consts::PI);
        let spec = spectral_side_partial(&session.spectral, &ind, constant, None)?;
        println!(
            "trace formula: geometric side {:.6}, spectral side {:.6} + tail bound {:.3} (from |t| ≥ {})",
            geo, spec.sum, spec.tail_bound, spec.tail_from
        );
        let m = main_term(&session.spectral, x)?;
        println!("main term M(X) = {m:.6}, N(X) = {}", inv.count_strictly_below(x));
    }

    // three-route transform agreement
    let mut worst_route: f64 = 0.0;
    for s in [
        Complex64::new(0.6, 0.0),
        Complex64::new(0.9, 0.0),
        Complex64::new(0.5, 2.0),
        Complex64::new(0.5, 10.0),
    ] {
        let sp = SpectralParameter::from_s(s);
        let numeric = huber_numeric(&ind, &sp, session.cfg.quad_tol)?;
        let closed = huber_closed(&ind, &sp)?;
        worst_route = worst_route.max((numeric - closed).norm() / numeric.norm().max(1e-12));
    }
    println!(
        "transform routes: max relative deviation {:.3e} (tolerance {:.1e})",
        worst_route, session.cfg.huber_tol
    );

    // seeded random coset-translate invariance spot checks
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(session.cfg.seed);
    let p = perpcount::MoebiusElement::diagonal(session.pres.m())
        .map_err(|e| Failure::Config(e.to_string()))?;
    let mut worst_b: f64 = 0.0;
    for rep in inv.representatives().iter().take(40) {
        if rep.class == perpcount::group::CosetClass::Identity {
            continue;
        }
        let j = rng.gen_range(-2i32..=2);
        let mut moved = rep.element;
        for _ in 0..j.abs() {
            moved = if j > 0 {
                p.compose(&moved)
            } else {
                p.inverse().compose(&moved)
            };
        }
        worst_b = worst_b.max((moved.b_invariant() - rep.b_value).abs() / rep.b_value.max(1.0));
    }
    println!("B-invariance spot checks: max relative drift {worst_b:.3e}");

    // moment route agreement at a representative argument
    let sp = SpectralParameter::from_s(Complex64::new(0.75, 0.0));
    let a2 = ind.outer_radius() * ind.outer_radius();
    let jq = perpcount::huber::j_s(&sp, a2, JRoute::Quadrature)?;
    let jt = perpcount::huber::j_s(&sp, a2, JRoute::Transformed)?;
    let j_dev = (jq - jt).norm() / jq.norm().max(1e-12);
    println!("moment routes at y = A²: relative deviation {j_dev:.3e}");

    let failed = worst_coset > session.cfg.oracle_tol
        || worst_route > session.cfg.huber_tol
        || worst_b > 1e-9
        || j_dev > session.cfg.huber_tol;
    if failed {
        return Err(Failure::Oracle(format!(
            "per-coset {worst_coset:.3e}, routes {worst_route:.3e}, B-drift {worst_b:.3e}, moments {j_dev:.3e}"
        )));
    }
    println!("trace check passed");
    Ok(())
}
