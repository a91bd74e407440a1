//! Command-line runner: one subcommand per verification suite.
//!
//! Every run prints a single JSON document to stdout — the command, the
//! effective configuration, the reports it produced, and an overall verdict.
//! `--out FILE` mirrors that document to disk; suites that measure tables
//! also write `FILE` with `.csv` / `.svg` extensions. `--log FILE` appends
//! timestamped progress lines (kept out of stdout so reports stay
//! byte-deterministic).
//!
//! Exit codes: 0 every check passed, 1 at least one check failed, 2 usage or
//! configuration error, 3 a hypothesis was refused (no claim made either
//! way). A refusal only surfaces when nothing failed outright.

mod suites;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use hessian_lab::config::RunConfig;
use hessian_lab::{CheckOutcome, CheckReport, LabError};

use crate::suites::SuiteRun;

#[derive(Parser)]
#[command(
    name = "hessian-lab",
    version,
    about = "Verification suites for discrete complex Hessian measures on the flat torus"
)]
struct Cli {
    /// Key-value config file; explicit flags below override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Complex dimension of the torus.
    #[arg(long, global = true, value_name = "N")]
    n: Option<usize>,

    /// Grid points per real axis (even, at least 8).
    #[arg(long, global = true, value_name = "SIDE")]
    grid: Option<usize>,

    /// Hessian order m (1..=n).
    #[arg(long, global = true, value_name = "M")]
    m: Option<usize>,

    /// Branch-weight parameters for the singular suites, comma-separated.
    #[arg(long, global = true, value_name = "K,...", value_delimiter = ',')]
    k: Option<Vec<f64>>,

    /// Regularization ladder, comma-separated and strictly decreasing.
    #[arg(long, global = true, value_name = "EPS,...", value_delimiter = ',')]
    eps: Option<Vec<f64>>,

    /// Mask radius for singular-mass integrals (default depends on k).
    #[arg(long, global = true, value_name = "R")]
    radius: Option<f64>,

    /// Seed for every randomized suite.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Override the grid-derived total-mass tolerance.
    #[arg(long = "tol-mass", global = true, value_name = "TOL")]
    tol_mass: Option<f64>,

    /// Write the JSON report here (plus .csv/.svg siblings for table suites).
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Append timestamped progress lines to this file.
    #[arg(long, global = true, value_name = "FILE")]
    log: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mixed-density lower bound on seeded random cone tuples.
    CheckGarding,
    /// Pointwise mixed-measure inequality on a smooth two-potential pair.
    VerifyMixed {
        /// Trig amplitude of the pair; steep values leave the cone and are
        /// refused rather than graded.
        #[arg(long, default_value_t = 0.02)]
        amp: f64,
    },
    /// Total-mass conservation at the configured grid and its refinement.
    MassConservation,
    /// Comparison principle on a constructed ordered potential pair.
    Compare,
    /// Domination principle for a pair whose difference set carries no mass.
    Dominate,
    /// Eps-ladder masses of the two-branch log family, one report per k.
    SingularMass,
    /// Product-bound violation detection for the two-branch log family.
    Violation,
    /// Gradient-energy boundedness and singular-mass trend extrapolation.
    W12,
    /// Randomized certified lower bound for the relative capacity.
    Capacity,
    /// Every suite above, in a fixed order.
    All,
}

/// The single JSON document a run prints.
#[derive(Serialize)]
struct Output<'a> {
    command: &'a str,
    verdict: &'a str,
    config: &'a RunConfig,
    reports: &'a [CheckReport],
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, LabError> {
    let cfg = effective_config(cli)?;
    let name = command_name(&cli.command);
    log_line(&cfg, &format!("start {name}"))?;
    let outcome = dispatch(&cli.command, &cfg)?;
    let (verdict, code) = grade(&outcome.reports);

    let doc = Output { command: name, verdict, config: &cfg, reports: &outcome.reports };
    let mut json = serde_json::to_string_pretty(&doc)
        .map_err(|e| LabError::Config(format!("serializing the report document: {e}")))?;
    json.push('\n');
    print!("{json}");

    if let Some(out) = &cfg.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(out, &json)?;
        if let Some(csv) = &outcome.csv {
            fs::write(out.with_extension("csv"), csv)?;
        }
        if let Some(svg) = &outcome.chart {
            fs::write(out.with_extension("svg"), svg)?;
        }
    }

    log_line(&cfg, &format!("done {name} verdict={verdict}"))?;
    Ok(code)
}

/// Config file (or defaults) with flag overrides applied, then revalidated.
fn effective_config(cli: &Cli) -> Result<RunConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(grid) = cli.grid {
        cfg.grid = grid;
    }
    if let Some(m) = cli.m {
        cfg.m = m;
    }
    if let Some(k) = &cli.k {
        cfg.k_list = k.clone();
    }
    if let Some(eps) = &cli.eps {
        cfg.eps_list = eps.clone();
    }
    if let Some(radius) = cli.radius {
        cfg.radius = Some(radius);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol_mass {
        cfg.tol_mass = Some(tol);
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(log) = &cli.log {
        cfg.log = Some(log.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CheckGarding => "check-garding",
        Command::VerifyMixed { .. } => "verify-mixed",
        Command::MassConservation => "mass-conservation",
        Command::Compare => "compare",
        Command::Dominate => "dominate",
        Command::SingularMass => "singular-mass",
        Command::Violation => "violation",
        Command::W12 => "w12",
        Command::Capacity => "capacity",
        Command::All => "all",
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<SuiteRun, LabError> {
    match cmd {
        Command::CheckGarding => suites::check_garding(cfg),
        Command::VerifyMixed { amp } => suites::verify_mixed(cfg, *amp),
        Command::MassConservation => suites::mass_conservation(cfg),
        Command::Compare => suites::compare(cfg),
        Command::Dominate => suites::dominate(cfg),
        Command::SingularMass => suites::singular_mass(cfg),
        Command::Violation => suites::violation(cfg),
        Command::W12 => suites::w12(cfg),
        Command::Capacity => suites::capacity(cfg),
        Command::All => suites::all(cfg),
    }
}

/// Failure outranks refusal: exit 1 if anything failed, else 3 if anything
/// was refused, else 0.
fn grade(reports: &[CheckReport]) -> (&'static str, ExitCode) {
    if reports.iter().any(|r| r.outcome == CheckOutcome::Failed) {
        ("fail", ExitCode::from(1))
    } else if reports.iter().any(|r| r.refused_outcome()) {
        ("refused", ExitCode::from(3))
    } else {
        ("pass", ExitCode::SUCCESS)
    }
}

fn log_line(cfg: &RunConfig, msg: &str) -> Result<(), LabError> {
    let Some(path) = &cfg.log else {
        return Ok(());
    };
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(file, "[{stamp}] {msg}")?;
    Ok(())
}
