//! (μ/μ_w, λ)-CMA-ES with an optional active covariance update, driven
//! through an ask/tell interface.
//!
//! The controller in [`crate::saacm`] tells the same state either true or
//! surrogate fitness values; only the former enter the stagnation history
//! used by [`CmaState::check_termination`].

mod params;
mod state;

pub use params::{default_params, CmaParams};
pub use state::{CmaState, Population, TerminationConfig, TerminationReason};

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CmaError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("non-finite fitness value at index {0}")]
    InvalidFitness(usize),
    #[error("population was sampled at generation {sampled}, state is at {current}")]
    StalePopulation { sampled: u64, current: u64 },
    #[error("population has no fitness values")]
    MissingFitness,
    #[error("numerical failure: {0}")]
    Numerical(#[from] NumericsError),
}
