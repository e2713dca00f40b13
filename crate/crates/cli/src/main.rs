//! `ndqv`: spectral gaps, circuit compilation and Monte Carlo verification runs.
//!
//! Exit codes: 0 success, 1 verification verdict failure, 2 usage error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ndqv::circuit::compile::{circuits_for_catalog, TwoQubitVariant};
use ndqv::circuit::text::to_text_many;
use ndqv::harness::{self, Backend, ExperimentSpec, Mode, Protocol, RunReport};
use ndqv::ndqv::SequentialProtocol;
use ndqv::selfcheck;
use ndqv::state::{NoiseKind, NoiseSpec};
use ndqv::strategy::{sample_complexity, spectral_gap, Catalog};
use ndqv::Error;

#[derive(Parser)]
#[command(name = "ndqv", version, about = "Quantum state verification with sequential nondemolition measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral gap of a catalog strategy or its sequential protocol.
    Gap {
        #[command(flatten)]
        sel: Selector,
        /// Use the sequential nondemolition protocol built from the strategy's tests.
        #[arg(long)]
        sequential: bool,
        /// Infidelity for the sample-complexity estimate.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Significance level for the sample-complexity estimate.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo verification run.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        sequential: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::StopOnFail)]
        mode: ModeArg,
        #[command(flatten)]
        out: Output,
    },
    /// Fidelity estimate from a sequential protocol in count-frequency mode.
    Fidelity {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Circuits implementing each setting, in the line-based circuit format.
    Compile {
        #[command(flatten)]
        sel: Selector,
        #[arg(long, value_enum, default_value_t = VariantArg::Toffoli)]
        variant: VariantArg,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Computed and closed-form gap over a grid of angles, as CSV.
    Sweep {
        /// Catalog strategy.
        selector: String,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Smallest angle of the grid (radians).
        #[arg(long, default_value_t = 0.01)]
        from: f64,
        /// Largest angle of the grid (radians).
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4 - 0.01)]
        to: f64,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the numerical self-check suite.
    Check,
}

#[derive(Args)]
struct Selector {
    /// Catalog entry: bell, bell-ext, 2qb3, 2qb4, adp2, adp3, ghzN, ghzN-full.
    selector: String,
    /// Target angle in radians, in (0, pi/4).
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    sel: Selector,
    /// Source infidelity; a comma-separated list alternates between sources.
    #[arg(long, default_value = "0")]
    epsilon: String,
    #[arg(long, value_enum, default_value_t = NoiseArg::WorstCase)]
    noise: NoiseArg,
    /// Infidelity of the alternative hypothesis; defaults to the largest
    /// positive source infidelity, or 0.01.
    #[arg(long)]
    verify_epsilon: Option<f64>,
    /// Number of copies.
    #[arg(long, default_value_t = 1000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Matrix)]
    backend: BackendArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Toffoli)]
    variant: VariantArg,
}

#[derive(Args)]
struct Output {
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    StopOnFail,
    CountFrequency,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Matrix,
    Circuit,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Toffoli,
    CnotPair,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    WorstCase,
    Random,
    Depolarizing,
}

impl From<VariantArg> for TwoQubitVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Toffoli => TwoQubitVariant::Toffoli,
            VariantArg::CnotPair => TwoQubitVariant::CnotPair,
        }
    }
}

enum Failure {
    Usage(String),
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
fn emit(path: Option<&Path>, content: &str) -> CmdResult {
    let Some(path) = path else {
        print!("{content}");
        return Ok(());
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(content.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn catalog(sel: &Selector) -> Result<(Catalog, Option<f64>), Failure> {
    let cat: Catalog = sel.selector.parse()?;
    if cat.needs_theta() && sel.theta.is_none() {
        return Err(usage(format!("'{cat}' needs --theta")));
    }
    let theta = if cat.needs_theta() { sel.theta } else { None };
    Ok((cat, theta))
}

fn cmd_gap(sel: &Selector, sequential: bool, epsilon: Option<f64>, delta: Option<f64>, out: &Output) -> CmdResult {
    let (cat, theta) = catalog(sel)?;
    let strategy = cat.strategy(theta)?;
    let (gap, analytic) = if sequential {
        (SequentialProtocol::from_strategy(&strategy)?.protocol_gap()?, 1.0)
    } else {
        (spectral_gap(&strategy)?, cat.analytic_nu(theta)?)
    };
    let complexity = match (epsilon, delta) {
        (Some(e), Some(d)) => Some(sample_complexity(gap.nu, e, d)?),
        (None, None) => None,
        _ => return Err(usage("--epsilon and --delta go together")),
    };
    let text = match out.format {
        Format::Json => {
            let v = json!({
                "selector": cat.to_string(),
                "theta": theta,
                "sequential": sequential,
                "nu": gap.nu,
                "lambda2": gap.lambda2,
                "nu_analytic": analytic,
                "epsilon": epsilon,
                "delta": delta,
                "n_exact": complexity.map(|c| c.exact),
                "n_approx": complexity.map(|c| c.approx),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => {
            let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
            format!(
                "selector,theta,sequential,nu,lambda2,nu_analytic,epsilon,delta,n_exact,n_approx\n{cat},{},{sequential},{:.16e},{:.16e},{:.16e},{},{},{},{}\n",
                opt(theta),
                gap.nu,
                gap.lambda2,
                analytic,
                opt(epsilon),
                opt(delta),
                complexity.map(|c| c.exact.to_string()).unwrap_or_default(),
                complexity.map(|c| c.approx.to_string()).unwrap_or_default(),
            )
        }
    };
    emit(out.out.as_deref(), &text)
}

fn build_spec(run: &RunArgs, sequential: bool, mode: Mode) -> Result<ExperimentSpec, Failure> {
    let (cat, theta) = catalog(&run.sel)?;
    let strategy = cat.strategy(theta)?;
    let protocol = if sequential {
        Protocol::Sequential(SequentialProtocol::from_strategy(&strategy)?)
    } else {
        Protocol::Strategy(strategy)
    };
    let kind = match run.noise {
        NoiseArg::WorstCase => NoiseKind::WorstCaseOrthogonal,
        NoiseArg::Random => NoiseKind::RandomOrthogonal,
        NoiseArg::Depolarizing => NoiseKind::Depolarizing,
    };
    let epsilons = run
        .epsilon
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("invalid --epsilon entry '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let sources = epsilons.iter().map(|&e| NoiseSpec::new(kind, e, run.seed)).collect::<ndqv::Result<Vec<_>>>()?;
    let hypothesis_epsilon =
        run.verify_epsilon.unwrap_or_else(|| epsilons.iter().copied().fold(0.0, f64::max)).max(0.0);
    let hypothesis_epsilon = if hypothesis_epsilon > 0.0 { hypothesis_epsilon } else { 0.01 };
    let (backend, circuits) = match run.backend {
        BackendArg::Matrix => (Backend::Matrix, None),
        BackendArg::Circuit => {
            let cs = circuits_for_catalog(cat, theta, run.variant.into())?
                .ok_or_else(|| usage(format!("no circuit compilation for '{cat}'")))?;
            (Backend::Circuit, Some(cs))
        }
    };
    Ok(ExperimentSpec {
        name: cat.to_string(),
        protocol,
        backend,
        circuits,
        sources,
        n_copies: run.n,
        seed: run.seed,
        mode,
        hypothesis_epsilon,
    })
}

fn report_text(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Csv => format!("{}\n{}\n", RunReport::CSV_HEADER, report.to_csv_row()),
    }
}

fn cmd_simulate(run: &RunArgs, sequential: bool, mode: ModeArg, out: &Output) -> CmdResult {
    let mode = match mode {
        ModeArg::StopOnFail => Mode::StopOnFail,
        ModeArg::CountFrequency => Mode::CountFrequency,
    };
    let report = harness::run(&build_spec(run, sequential, mode)?)?;
    emit(out.out.as_deref(), &report_text(&report, out.format))?;
    if report.accepted {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_fidelity(run: &RunArgs, out: &Output) -> CmdResult {
    let report = harness::run(&build_spec(run, true, Mode::CountFrequency)?)?;
    let est = harness::estimate_fidelity(&report)?;
    let text = match out.format {
        Format::Json => {
            let v = json!({
                "selector": report.name,
                "n_run": report.n_run,
                "n_pass": report.n_pass,
                "source_fidelity": report.source_fidelity,
                "fidelity": est.estimate,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => format!(
            "selector,n_run,n_pass,source_fidelity,fidelity,ci_low,ci_high\n{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            report.name, report.n_run, report.n_pass, report.source_fidelity, est.estimate, est.ci_low, est.ci_high
        ),
    };
    emit(out.out.as_deref(), &text)
}

fn cmd_compile(sel: &Selector, variant: VariantArg, out: Option<&Path>) -> CmdResult {
    let (cat, theta) = catalog(sel)?;
    let circuits = circuits_for_catalog(cat, theta, variant.into())?
        .ok_or_else(|| usage(format!("no circuit compilation for '{cat}'")))?;
    emit(out, &to_text_many(&circuits))
}

fn cmd_sweep(selector: &str, points: usize, from: f64, to: f64, out: Option<&Path>) -> CmdResult {
    let cat: Catalog = selector.parse()?;
    if points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    ndqv::state::check_theta(from)?;
    ndqv::state::check_theta(to)?;
    if from >= to {
        return Err(usage("--from must be smaller than --to"));
    }
    let mut text = String::from("theta,nu_computed,nu_analytic,abs_err\n");
    let mut worst: f64 = 0.0;
    for k in 0..points {
        let theta = from + (to - from) * k as f64 / (points - 1) as f64;
        let nu = spectral_gap(&cat.strategy(Some(theta))?)?.nu;
        let analytic = cat.analytic_nu(Some(theta))?;
        let err = (nu - analytic).abs();
        worst = worst.max(err);
        text.push_str(&format!("{theta:.16e},{nu:.16e},{analytic:.16e},{err:.16e}\n"));
    }
    emit(out, &text)?;
    if worst <= 1e-8 {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_check() -> CmdResult {
    let results = selfcheck::run_all();
    let failed: Vec<_> = results.iter().filter(|r| !r.passed()).collect();
    for r in &results {
        println!("{r}");
    }
    println!("{} checks, {} failed", results.len(), failed.len());
    for r in &failed {
        eprintln!("failed: {}", r.name);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Gap { sel, sequential, epsilon, delta, out } => cmd_gap(sel, *sequential, *epsilon, *delta, out),
        Command::Simulate { run, sequential, mode, out } => cmd_simulate(run, *sequential, *mode, out),
        Command::Fidelity { run, out } => cmd_fidelity(run, out),
        Command::Compile { sel, variant, out } => cmd_compile(sel, *variant, out.as_deref()),
        Command::Sweep { selector, points, from, to, out } => cmd_sweep(selector, *points, *from, *to, out.as_deref()),
        Command::Check => cmd_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
