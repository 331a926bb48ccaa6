//! Linear and nonnegative least-squares programs behind the vertex and
//! extreme-ray conditions, plus the projections used to measure distances
//! to polyhedral sets.

mod feasibility;
mod lp;
mod nnls;
mod simplex;

pub use feasibility::{
    lp_dual_certificate, lp_dual_check, lp_feasible, DualCertificate, LpFeasibilityProblem, OptResult, OptStatus,
};
pub use lp::{Bound, LinearProgram, LpSolution, LpStatus};
pub use nnls::{cone_project, hull_project, kkt_residuals, ldp_project, nnls, qp_nearest, KktResiduals, QpProblem};
pub use simplex::{solve_standard, SimplexOutcome};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("iteration limit of {0} active-set changes reached")]
    IterationLimit(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
