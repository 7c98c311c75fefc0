//! Benchmark orchestration and analysis: trial grids with resumable CSV
//! output, ERT, bootstrapped ECDFs, rank-sum tests, speedups and timing.

mod analysis;
mod format;
mod records;
mod runner;
mod selftest;
mod timing;
mod writers;

pub use analysis::{
    bootstrap_ecdf, bootstrap_runtimes, compute_ert, ert_of, ert_table, rank_sum_samples,
    rank_sum_test, speedup_table, EcdfCurve, Ert, ErtRow, RankSum, Speedup, SpeedupRow,
    ECDF_GRID_PER_DECADE,
};
pub use format::{parse_f64, sci, sci_short};
pub use records::{
    group_records, read_trials, sort_records, target_column, trials_header, write_trials, TrialKey,
    TrialRecord, TRIAL_COLUMNS,
};
pub use runner::{
    load_trials, run_experiment, run_trial, save_trials, trial_seed, ExperimentConfig, CONFIG_FILE,
    MANIFEST_FILE, TRIALS_FILE,
};
pub use selftest::{same_distribution, selftest, SelfCheck};
pub use timing::{
    loglog_slope, timing_experiment, training_scaling, TimingConfig, TimingReport, TimingRow,
};
pub use writers::{write_ecdf, write_ert, write_speedup, write_timing};

use crate::restart::RestartError;
use crate::surrogate::SurrogateError;
use crate::testbed::TestbedError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("target {0:e} is not in the trial's target list")]
    UnknownTarget(f64),
    #[error(transparent)]
    Restart(#[from] RestartError),
    #[error(transparent)]
    Testbed(#[from] TestbedError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}
