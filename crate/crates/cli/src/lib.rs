//! Command-line front-end for the benchmark harness.
//!
//! Every subcommand reads an optional `--config` file of `key=value` lines;
//! flags override file values and use the same key names.

mod commands;
mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use saacm_core::harness::HarnessError;
pub use settings::{parse_list, parse_ranges, Settings, KNOWN_KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Harness(HarnessError::InvalidConfig(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "saacm",
    version,
    about = "Surrogate-assisted CMA-ES benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a grid of trials and write trials.csv.
    Run(RunArgs),
    /// Expected running times per target, written to ert.csv.
    Ert(ErtArgs),
    /// Bootstrapped runtime distributions, written to ecdf.csv.
    Ecdf(EcdfArgs),
    /// Wall-clock cost per evaluation and training-time scaling.
    Timing(TimingArgs),
    /// ERT ratios and rank-sum tests between two algorithms.
    Speedup(SpeedupArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ipop-acma | bipop-cma | ipop-saacm | bipop-saacm
    #[arg(long)]
    algo: Option<String>,
    /// Function ids, comma-separated.
    #[arg(long)]
    fid: Option<String>,
    /// Dimensions, comma-separated.
    #[arg(long)]
    dim: Option<String>,
    /// Instance ids, e.g. `1..15` or `1,3,5`.
    #[arg(long)]
    instances: Option<String>,
    /// Evaluation budget per trial is this times D.
    #[arg(long = "budget-mult")]
    budget_mult: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Δf targets recorded per trial, comma-separated.
    #[arg(long)]
    target: Option<String>,
    #[arg(long = "g-start")]
    g_start: Option<String>,
    #[arg(long = "nhat-max")]
    nhat_max: Option<String>,
    #[arg(long = "lambda-hyp")]
    lambda_hyp: Option<String>,
    /// Active covariance update (overrides the algorithm default).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    active: Option<String>,
    /// Disable the surrogate (n̂ stays 0).
    #[arg(long = "no-surrogate")]
    no_surrogate: bool,
}

#[derive(Debug, Args)]
struct ErtArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding trials.csv; ert.csv is written there.
    #[arg(long)]
    out: Option<String>,
    /// Δf targets, comma-separated (default 1e-8).
    #[arg(long)]
    target: Option<String>,
}

#[derive(Debug, Args)]
struct EcdfArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    /// Δf targets (default: every target recorded in the trials).
    #[arg(long)]
    target: Option<String>,
    /// Bootstrap samples per (function, target).
    #[arg(long = "n-boot")]
    n_boot: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Debug, Args)]
struct SpeedupArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding trials.csv; outputs are written there.
    #[arg(long)]
    out: Option<String>,
    /// Additional trials files, comma-separated.
    #[arg(long)]
    input: Option<String>,
    /// Algorithm whose speedup is reported.
    #[arg(long)]
    algo: Option<String>,
    /// Reference algorithm.
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long)]
    target: Option<String>,
}

#[derive(Debug, Args)]
struct TimingArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    fid: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// True evaluations per (function, dimension).
    #[arg(long)]
    evals: Option<String>,
    /// Wall-clock limit in seconds per (function, dimension).
    #[arg(long)]
    wallclock: Option<String>,
    /// Training-set sizes for the scaling measurement.
    #[arg(long = "n-training")]
    n_training: Option<String>,
    /// Dimension of the scaling measurement.
    #[arg(long = "scaling-dim")]
    scaling_dim: Option<String>,
    /// Repetitions per training-set size.
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

fn load(config: &Option<PathBuf>, flags: &[(&str, &Option<String>)]) -> Result<Settings, CliError> {
    let mut s = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            Settings::parse(&text)?
        }
        None => Settings::default(),
    };
    for (key, value) in flags {
        if let Some(v) = value {
            s.set(key, v.clone());
        }
    }
    Ok(s)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => {
            let mut s = load(
                &a.config,
                &[
                    ("algo", &a.algo),
                    ("fid", &a.fid),
                    ("dim", &a.dim),
                    ("instances", &a.instances),
                    ("budget-mult", &a.budget_mult),
                    ("seed", &a.seed),
                    ("jobs", &a.jobs),
                    ("out", &a.out),
                    ("target", &a.target),
                    ("g-start", &a.g_start),
                    ("nhat-max", &a.nhat_max),
                    ("lambda-hyp", &a.lambda_hyp),
                    ("active", &a.active),
                ],
            )?;
            if a.no_surrogate {
                s.set("no-surrogate", "true");
            }
            commands::run(&s)
        }
        Command::Ert(a) => {
            let s = load(&a.config, &[("out", &a.out), ("target", &a.target)])?;
            commands::ert(&s)
        }
        Command::Ecdf(a) => {
            let s = load(
                &a.config,
                &[
                    ("out", &a.out),
                    ("target", &a.target),
                    ("n-boot", &a.n_boot),
                    ("seed", &a.seed),
                ],
            )?;
            commands::ecdf(&s)
        }
        Command::Speedup(a) => {
            let s = load(
                &a.config,
                &[
                    ("out", &a.out),
                    ("input", &a.input),
                    ("algo", &a.algo),
                    ("baseline", &a.baseline),
                    ("target", &a.target),
                ],
            )?;
            commands::speedup(&s)
        }
        Command::Timing(a) => {
            let s = load(
                &a.config,
                &[
                    ("out", &a.out),
                    ("fid", &a.fid),
                    ("dim", &a.dim),
                    ("evals", &a.evals),
                    ("wallclock", &a.wallclock),
                    ("n-training", &a.n_training),
                    ("scaling-dim", &a.scaling_dim),
                    ("reps", &a.reps),
                    ("seed", &a.seed),
                ],
            )?;
            commands::timing(&s)
        }
        Command::Selftest => commands::selftest(),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
