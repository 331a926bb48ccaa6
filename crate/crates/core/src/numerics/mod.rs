//! Dense linear algebra kernels.
//!
//! Everything here is sized for desk-scale problems (n up to a few dozen):
//! Gaussian elimination with partial pivoting, Householder least squares,
//! Cholesky, cyclic Jacobi for symmetric eigenproblems and golden-section
//! search for convex scalar functions.

mod eigen;
mod linalg;
mod matrix;
mod scalar;

pub use eigen::{gen_eig_max, gen_eig_max_pair, lambda_max, sym_eig, EigenResult, GenEigPair};
pub use linalg::{cholesky, forward_substitute, back_substitute_transpose, least_squares, solve_linear};
pub use matrix::{axpy, dot, norm2, norm_inf, scaled, sub, Matrix};
pub use scalar::{minimize_scalar_convex, ScalarMinimum};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("ragged rows: expected length {expected}, got {got}")]
    Ragged { expected: usize, got: usize },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular (pivot {pivot:e} at step {step})")]
    SingularMatrix { step: usize, pivot: f64 },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {0:e})")]
    NotPositiveDefinite(f64),
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("degenerate bracket [{0}, {1}]")]
    BadBracket(f64, f64),
}
