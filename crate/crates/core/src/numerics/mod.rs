//! Random number generation and the small amount of dense linear algebra the
//! optimizers need.

mod linalg;
mod rng;

pub use linalg::{
    dot, jacobi_eigen, norm, random_orthogonal, sym_eigen, EigenDecomposition, Matrix, SymMatrix,
    EIGEN_CLAMP, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE,
};
pub use rng::{hash_seed, hash_stream, Rng};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(&'static str),
}

/// `d` i.i.d. standard normal draws from `rng`.
pub fn gaussian_vector(rng: &mut Rng, d: usize) -> Vec<f64> {
    rng.gaussian_vector(d)
}
