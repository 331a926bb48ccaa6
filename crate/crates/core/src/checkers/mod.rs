//! Invariance deciders.
//!
//! Linear systems get exact tests: one LP per facet for H-polyhedra, the
//! Metzler test for the orthant, one coefficient LP per vertex or ray for
//! V-forms and generalized eigenvalue bounds for ellipsoids and Lorenz
//! cones. General systems are checked on sampled boundary points and never
//! reported as invariant.

mod polyhedral;
mod quadratic;
mod sampled;
mod system;

pub use polyhedral::{check_hpoly_linear, check_orthant_linear, check_vcone, check_vpolytope};
pub use quadratic::{check_ellipsoid_linear, check_lorenz_linear};
pub use sampled::check_nonlinear_sampled;
pub use system::{DynamicalSystem, VectorField};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::numerics::NumericsError;
use crate::sets::{ConvexSet, SetError};
use crate::solvers::SolverError;
use crate::tangent::TangentError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("the polyhedron is empty")]
    EmptySet,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Tangent(#[from] TangentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Invariant,
    NotInvariant,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub point: Vec<f64>,
    /// Size of the failed condition, e.g. `g_iᵀAx` or `xᵀQAx`.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetOptimum {
    pub facet: usize,
    /// `max g_iᵀ f(x)` over the facet; `None` when the facet is empty.
    pub optimum: Option<f64>,
    pub maximizer: Option<Vec<f64>>,
    /// The maximizer touches the artificial bounding box.
    pub on_box: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub index: usize,
    pub alpha: Vec<f64>,
    /// Whether the optimality system of the feasibility LP re-validated.
    pub dual_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Facets { facets: Vec<FacetOptimum> },
    Metzler { min_off_diagonal: f64 },
    Vertices { vertices: Vec<Coefficients> },
    Rays { rays: Vec<Coefficients> },
    /// `λ_max(AᵀQ + QA - ηQ) = lambda_max ≤ 0` with top eigenvector
    /// `witness`.
    Eigen { eta: f64, lambda_max: f64, witness: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub certificate: Option<Certificate>,
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Verdict {
    pub fn invariant(certificate: Certificate) -> Self {
        Self {
            decision: Decision::Invariant,
            certificate: Some(certificate),
            counterexample: None,
            warnings: Vec::new(),
        }
    }

    pub fn not_invariant(point: Vec<f64>, violation: f64) -> Self {
        Self {
            decision: Decision::NotInvariant,
            certificate: None,
            counterexample: Some(Counterexample { point, violation }),
            warnings: Vec::new(),
        }
    }

    pub fn unknown() -> Self {
        Self {
            decision: Decision::Unknown,
            certificate: None,
            counterexample: None,
            warnings: Vec::new(),
        }
    }

    pub fn with_warning(mut self, w: impl Into<String>) -> Self {
        self.warnings.push(w.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckOptions {
    pub t0: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            t0: 0.0,
            n_samples: 10_000,
            seed: 0,
            tolerances: Tolerances::DEFAULT,
        }
    }
}

fn check_system_dim(set: &ConvexSet, sys: &DynamicalSystem) -> Result<(), CheckError> {
    if set.dim() != sys.dim() {
        return Err(CheckError::Dimension(format!(
            "set lives in R^{} but the system in R^{}",
            set.dim(),
            sys.dim()
        )));
    }
    Ok(())
}

/// Routes a (set, system) pair to its decider.
pub fn check(set: &ConvexSet, sys: &DynamicalSystem, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    check_system_dim(set, sys)?;
    match (set, sys) {
        (ConvexSet::Vpolytope(p), _) => check_vpolytope(p, sys, opts),
        (ConvexSet::Vcone(c), _) => check_vcone(c, sys, opts),
        (ConvexSet::Hpolyhedron(p), DynamicalSystem::Linear(a)) => check_hpoly_linear(p, a, &opts.tolerances),
        (ConvexSet::Ellipsoid(e), DynamicalSystem::Linear(a)) => check_ellipsoid_linear(e, a, &opts.tolerances),
        (ConvexSet::Lorenz(c), DynamicalSystem::Linear(a)) => check_lorenz_linear(c, a, opts),
        (_, DynamicalSystem::General { .. }) => check_nonlinear_sampled(set, sys, opts),
    }
}
