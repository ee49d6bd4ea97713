mod grid;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grid::GridSpec;
use output::{Report, Table};
use serde::Serialize;
use serde_json::json;
use spectra_core::edelman::{wl_density, wl_gap_probability};
use spectra_core::ftwl::{ftwl_cdf, ftwl_moment, Backend, DensityCurve};
use spectra_core::hfma::equivalence_report;
use spectra_core::micro::{convergence_probe, kappa, MicroDist, Picture};
use spectra_core::montecarlo::{ks_distance, sample_min, TabulatedCdf};
use spectra_core::{Beta, EnsembleKind, EnsembleParams, Error};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_INVALID: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_GATE: u8 = 4;

#[derive(Parser, Serialize)]
#[command(name = "spectra", version, about = "Smallest-eigenvalue distributions of Wishart-Laguerre ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "csv")]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "SPECTRA_WORKERS")]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Ensemble {
    Ft,
    Wl,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum BackendArg {
    General,
    Explicit,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum PictureArg {
    Y,
    S,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum MomentSource {
    /// Finite-N fixed-trace moment.
    Finite,
    /// Universal coefficient of the microscopic limit.
    Micro,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Finite-N density p(x) and gap probability q(x).
    Density(DensityArgs),
    /// Microscopic hard-edge limit P, Q in the y or s picture.
    Micro(MicroArgs),
    /// Fixed-trace moments or microscopic kappa coefficients.
    Moments(MomentArgs),
    /// Monte Carlo sample with a KS comparison against the analytic curve.
    Mc(McArgs),
    /// HFMA versus Bessel determinant/Pfaffian equivalence check.
    Equiv(EquivArgs),
    /// Distance of scaled finite-N densities from the microscopic limit.
    Converge(ConvergeArgs),
}

#[derive(Args, Serialize)]
struct DensityArgs {
    #[arg(long, value_enum, default_value = "ft")]
    ensemble: Ensemble,
    #[arg(long, default_value_t = 1)]
    beta: u32,
    #[arg(long = "N")]
    n: u32,
    #[arg(long, default_value_t = 0)]
    nu: u32,
    /// Abscissas as min:max:points[:log]; default (t/N)·i/200 for FT and 0:4N:201 for WL.
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long, value_enum, default_value = "general")]
    backend: BackendArg,
    /// Fixed trace t.
    #[arg(long, default_value_t = 1.0)]
    trace: f64,
}

#[derive(Args, Serialize)]
struct MicroArgs {
    #[arg(long, default_value_t = 1)]
    beta: u32,
    #[arg(long, default_value_t = 0)]
    nu: u32,
    #[arg(long, value_enum, default_value = "y")]
    picture: PictureArg,
    /// Default 0:25:101 for y and 0:5:101 for s.
    #[arg(long)]
    grid: Option<GridSpec>,
}

#[derive(Args, Serialize)]
struct MomentArgs {
    #[arg(long, value_enum, default_value = "finite")]
    source: MomentSource,
    #[arg(long, default_value_t = 1)]
    beta: u32,
    #[arg(long = "N")]
    n: Option<u32>,
    #[arg(long, default_value_t = 1)]
    nu: u32,
    #[arg(long, default_value_t = 1)]
    ell: u32,
}

#[derive(Args, Serialize)]
struct McArgs {
    #[arg(long, value_enum, default_value = "ft")]
    ensemble: Ensemble,
    #[arg(long, default_value_t = 1)]
    beta: u32,
    #[arg(long = "N")]
    n: u32,
    #[arg(long, default_value_t = 0)]
    nu: u32,
    /// Number of samples.
    #[arg(long = "n", default_value_t = 100_000)]
    samples: usize,
    #[arg(long, env = "SPECTRA_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Largest accepted KS distance.
    #[arg(long, default_value_t = 0.01)]
    ks_gate: f64,
}

#[derive(Args, Serialize)]
struct EquivArgs {
    #[arg(long, default_value_t = 2)]
    beta: u32,
    #[arg(long, default_value_t = 1)]
    nu: u32,
    /// Default y in {0.5, 1, 2, 4, 8, 16, 25}.
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Largest accepted absolute difference.
    #[arg(long, env = "SPECTRA_TOL", default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Serialize)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 0)]
    nu: u32,
    #[arg(long = "Ns", value_delimiter = ',', default_value = "8,16,32")]
    ns: Vec<u32>,
    /// Default 1:16:61.
    #[arg(long)]
    grid: Option<GridSpec>,
}

enum Failure {
    Core(Error),
    Invalid(String),
    Gate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(Table, Option<serde_json::Value>), Failure>;

fn beta_of(b: u32) -> Result<Beta, Failure> {
    Beta::from_int(b).map_err(|_| Failure::Invalid(format!("beta must be 1 or 2, got {b}")))
}

fn density(a: &DensityArgs) -> Outcome {
    let beta = beta_of(a.beta)?;
    if !(a.trace > 0.0) {
        return Err(Failure::Invalid(format!("trace must be positive, got {}", a.trace)));
    }
    let mut table = Table::new(&["x", "p", "q"]);
    match a.ensemble {
        Ensemble::Ft => {
            let p = EnsembleParams::ft(a.n, a.nu, beta)?.with_trace(a.trace)?;
            let xs = match a.grid {
                Some(g) => g.values(),
                None => (0..=200).map(|i| a.trace / a.n as f64 * i as f64 / 200.0).collect(),
            };
            let backend = match a.backend {
                BackendArg::General => Backend::General,
                BackendArg::Explicit => Backend::Explicit,
            };
            let curve = DensityCurve::fixed_trace(&p, &xs, backend)?;
            let qs = par_map(&xs, |x| ftwl_cdf(&p, x))?;
            for ((x, v), q) in xs.iter().zip(&curve.values).zip(qs) {
                table.push(vec![(*x).into(), (*v).into(), q.into()], curve.formula.clone());
            }
        }
        Ensemble::Wl => {
            let p = EnsembleParams::wl(a.n, a.nu, beta)?;
            let xs = match a.grid {
                Some(g) => g.values(),
                None => GridSpec::linear(0.0, 4.0 * a.n as f64, 201).values(),
            };
            let rows = par_map(&xs, |x| {
                let v = if x == 0.0 { wl_origin(&p)? } else { wl_density(&p, x)? };
                Ok((v, wl_gap_probability(&p, x)?))
            })?;
            for (x, (v, q)) in xs.iter().zip(rows) {
                table.push(vec![(*x).into(), v.into(), q.into()], "edelman coefficients");
            }
        }
    }
    Ok((table, None))
}

/// Value of the WL density at the origin: infinite for `ν = 0`, finite for
/// `ν = 1`, zero otherwise.
fn wl_origin(p: &EnsembleParams) -> spectra_core::Result<f64> {
    match p.nu() {
        0 => Ok(f64::INFINITY),
        1 => wl_density(p, f64::MIN_POSITIVE),
        _ => Ok(0.0),
    }
}

fn micro(a: &MicroArgs) -> Outcome {
    let beta = beta_of(a.beta)?;
    let picture = match a.picture {
        PictureArg::Y => Picture::Y,
        PictureArg::S => Picture::S,
    };
    let dist = MicroDist::new(beta, a.nu, picture)?;
    let xs = match (a.grid, picture) {
        (Some(g), _) => g.values(),
        (None, Picture::Y) => GridSpec::linear(0.0, 25.0, 101).values(),
        (None, Picture::S) => GridSpec::linear(0.0, 5.0, 101).values(),
    };
    let arg = match picture {
        Picture::Y => "y",
        Picture::S => "s",
    };
    let rows = par_map(&xs, |x| Ok((dist.p(x)?, dist.q(x)?)))?;
    let mut table = Table::new(&[arg, "p", "q"]);
    let method = match (beta, a.nu % 2) {
        (Beta::Two, _) => "bessel determinant",
        (Beta::One, 1) => "bessel pfaffian",
        (Beta::One, _) => "closed form",
    };
    for (x, (p, q)) in xs.iter().zip(rows) {
        table.push(vec![(*x).into(), p.into(), q.into()], method);
    }
    Ok((table, None))
}

fn moments(a: &MomentArgs) -> Outcome {
    let beta = beta_of(a.beta)?;
    if a.ell == 0 {
        return Err(Failure::Invalid("ell must be >= 1".into()));
    }
    match a.source {
        MomentSource::Finite => {
            let n = a.n.ok_or_else(|| Failure::Invalid("--N is required for finite moments".into()))?;
            let p = EnsembleParams::ft(n, a.nu, beta)?;
            let m = ftwl_moment(&p, a.ell)?;
            let scale = (4.0 * (n as f64).powi(3)).powi(a.ell as i32);
            let mut table = Table::new(&["N", "nu", "ell", "moment", "scaled"]);
            let method = if a.nu % 2 == 1 { "closed beta sum" } else { "quadrature" };
            table.push(vec![n.into(), a.nu.into(), a.ell.into(), m.into(), (scale * m).into()], method);
            Ok((table, None))
        }
        MomentSource::Micro => {
            let k = kappa(a.ell, a.nu, beta)?;
            let mut table = Table::new(&["beta", "nu", "ell", "kappa", "kappa_over_4"]);
            table.push(
                vec![beta.as_int().into(), a.nu.into(), a.ell.into(), k.into(), (k / 4.0).into()],
                "adaptive quadrature",
            );
            Ok((table, None))
        }
    }
}

fn mc(a: &McArgs) -> Outcome {
    let beta = beta_of(a.beta)?;
    if a.samples == 0 || a.bins == 0 {
        return Err(Failure::Invalid("--n and --bins must be positive".into()));
    }
    let p = match a.ensemble {
        Ensemble::Ft => EnsembleParams::ft(a.n, a.nu, beta)?,
        Ensemble::Wl => EnsembleParams::wl(a.n, a.nu, beta)?,
    };
    let batch = sample_min(&p, a.samples, a.seed)?;
    let max = batch.values.iter().copied().fold(0.0, f64::max);
    let upper = match p.kind {
        EnsembleKind::Ft => (max * 1.05).min(p.trace / a.n as f64),
        EnsembleKind::Wl => max * 1.05,
    };
    let analytic = match beta {
        Beta::One => Some(match p.kind {
            EnsembleKind::Ft => TabulatedCdf::fixed_trace(&p, 800)?,
            EnsembleKind::Wl => TabulatedCdf::wishart(&p, upper, 800)?,
        }),
        Beta::Two => None,
    };
    let width = upper / a.bins as f64;
    let mut counts = vec![0usize; a.bins];
    for &v in &batch.values {
        let i = ((v / width) as usize).min(a.bins - 1);
        counts[i] += 1;
    }
    let mut table = Table::new(&["x", "empirical", "analytic"]);
    for (i, c) in counts.iter().enumerate() {
        let (lo, hi) = (i as f64 * width, (i + 1) as f64 * width);
        let emp = *c as f64 / (batch.len() as f64 * width);
        let exact = analytic.as_ref().map_or(f64::NAN, |t| (t.eval(hi) - t.eval(lo)) / width);
        table.push(vec![(0.5 * (lo + hi)).into(), emp.into(), exact.into()], "histogram");
    }
    let ks = match &analytic {
        Some(t) => Some(ks_distance(&batch, |x| t.eval(x))?),
        None => None,
    };
    let pass = ks.map(|k| k < a.ks_gate);
    let suite = json!({
        "samples": batch.len(),
        "seed": a.seed,
        "mean": batch.mean(),
        "ks": ks,
        "ks_gate": a.ks_gate,
        "pass": pass,
    });
    if pass == Some(false) {
        return gate(table, suite, format!("KS distance {} exceeds {}", ks.unwrap(), a.ks_gate));
    }
    Ok((table, Some(suite)))
}

fn equiv(a: &EquivArgs) -> Outcome {
    let beta = beta_of(a.beta)?;
    if !(a.tol > 0.0) {
        return Err(Failure::Invalid(format!("tolerance must be positive, got {}", a.tol)));
    }
    let ys = match a.grid {
        Some(g) => g.values(),
        None => vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 25.0],
    };
    let r = equivalence_report(beta, a.nu, &ys)?;
    let mut table = Table::new(&["y", "q_hfma", "q_bessel", "p_hfma", "p_bessel", "q_diff", "p_diff"]);
    for row in &r.rows {
        table.push(
            vec![
                row.y.into(),
                row.q_hfma.into(),
                row.q_bessel.into(),
                row.p_hfma.into(),
                row.p_bessel.into(),
                row.q_diff.into(),
                row.p_diff.into(),
            ],
            "torus quadrature vs bessel",
        );
    }
    let suite = json!({ "max_diff": r.max_diff, "tol": a.tol, "pass": r.max_diff < a.tol });
    if r.max_diff >= a.tol {
        return gate(table, suite, format!("max difference {:e} exceeds {:e}", r.max_diff, a.tol));
    }
    Ok((table, Some(suite)))
}

fn converge(a: &ConvergeArgs) -> Outcome {
    let ys = a.grid.unwrap_or(GridSpec::linear(1.0, 16.0, 61)).values();
    if ys.iter().any(|&y| y <= 0.0) {
        return Err(Failure::Invalid("convergence grid must be positive".into()));
    }
    let rows = convergence_probe(a.nu, &a.ns, &ys)?;
    let mut table = Table::new(&["N", "ft_gap", "wl_gap"]);
    for r in &rows {
        table.push(vec![r.n_dim.into(), r.ft_gap.into(), r.wl_gap.into()], "sup over grid");
    }
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].ft_gap < w[0].ft_gap && w[1].wl_gap < w[0].wl_gap);
    let suite = json!({ "strictly_decreasing": decreasing, "pass": decreasing });
    if !decreasing {
        return gate(table, suite, "gaps do not decrease strictly with N".into());
    }
    Ok((table, Some(suite)))
}

fn gate(table: Table, suite: serde_json::Value, msg: String) -> Outcome {
    GATE_RESULT.with(|g| *g.borrow_mut() = Some((table, suite)));
    Err(Failure::Gate(msg))
}

thread_local! {
    static GATE_RESULT: std::cell::RefCell<Option<(Table, serde_json::Value)>> = const { std::cell::RefCell::new(None) };
}

fn par_map<T: Send>(xs: &[f64], f: impl Fn(f64) -> spectra_core::Result<T> + Sync) -> Result<Vec<T>, Failure> {
    use rayon::prelude::*;
    Ok(xs.par_iter().map(|&x| f(x)).collect::<spectra_core::Result<Vec<T>>>()?)
}

fn emit(cli: &Cli, table: Table, suite: Option<serde_json::Value>) -> Result<(), String> {
    let report = Report {
        config: json!({
            "command": &cli.command,
            "format": cli.format,
            "output": cli.output,
            "workers": cli.workers,
        }),
        table,
        suite_results: suite,
    };
    let text = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(EXIT_INVALID);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot start {w} workers: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Density(a) => density(a),
        Command::Micro(a) => micro(a),
        Command::Moments(a) => moments(a),
        Command::Mc(a) => mc(a),
        Command::Equiv(a) => equiv(a),
        Command::Converge(a) => converge(a),
    };
    match result {
        Ok((table, suite)) => match emit(&cli, table, suite) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Err(Failure::Gate(msg)) => {
            if let Some((table, suite)) = GATE_RESULT.with(|g| g.borrow_mut().take()) {
                if let Err(e) = emit(&cli, table, Some(suite)) {
                    eprintln!("error: {e}");
                }
            }
            eprintln!("gate failed: {msg}");
            ExitCode::from(EXIT_GATE)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Unsupported(_) => EXIT_UNSUPPORTED,
                Error::Domain(_) | Error::InvalidParams(_) | Error::DivisionByZero => EXIT_INVALID,
                Error::Matrix(_) | Error::Quadrature(_) => 1,
            })
        }
    }
}
