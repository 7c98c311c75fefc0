//! Comparison-based surrogate: a ranking SVM whose RBF kernel uses the
//! current search covariance as its metric.

mod hyper;
mod kernel;
mod svm;

pub use hyper::{n_training_max, HyperBox, SurrogateHyperParams, HYPER_DIMS};
pub use kernel::{build_transform, KernelTransform};
pub use svm::{
    rank_error, rank_error_scores, train, Sample, SurrogateModel, TrainStats, TrainingPool,
    KKT_TOLERANCE,
};

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurrogateError {
    #[error("need at least 2 distinct training points, got {0}")]
    NotEnoughData(usize),
    #[error("training value is not finite")]
    InvalidValue,
    #[error(transparent)]
    Numerical(#[from] NumericsError),
}
