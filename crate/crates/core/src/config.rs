//! Numerical tolerances used across the crate.
//!
//! Every threshold that influences a verdict lives here so that a single
//! record, echoed back in reports, fully determines the decision procedure.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Smallest admissible pivot magnitude in Gaussian elimination.
    pub pivot: f64,
    /// Sweep budget for the cyclic Jacobi eigensolver.
    pub jacobi_sweeps: usize,
    /// Off-diagonal convergence threshold, relative to the Frobenius norm.
    pub jacobi_rel: f64,
    /// Minimum eigenvalue (and Cholesky pivot) for positive definiteness.
    pub positive_definite: f64,
    /// Relative band around each defining inequality treated as boundary.
    pub boundary: f64,
    /// Tolerance for tangent-cone membership of a vector field value.
    pub cone: f64,
    /// Phase-I objective at or below which an LP counts as feasible.
    pub lp_feasibility: f64,
    /// Facet LP optimum at or below which a facet condition holds.
    pub facet_optimum: f64,
    /// Off-diagonal lower bound for the Metzler test.
    pub metzler: f64,
    /// Largest generalized eigenvalue accepted as nonpositive.
    pub eigen_sign: f64,
    /// Half-width of the artificial box that bounds unbounded facets.
    pub facet_box: f64,
    /// Band beyond which a trajectory counts as having left the set.
    pub exit_band: f64,
    /// Inward offset applied to boundary starts before integration.
    pub inward_push: f64,
    /// State norm at which a trajectory is declared divergent.
    pub divergence: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        pivot: 1e-12,
        jacobi_sweeps: 100,
        jacobi_rel: 1e-12,
        positive_definite: 1e-10,
        boundary: 1e-8,
        cone: 1e-8,
        lp_feasibility: 1e-9,
        facet_optimum: 1e-8,
        metzler: 1e-10,
        eigen_sign: 1e-9,
        facet_box: 1e6,
        exit_band: 1e-6,
        inward_push: 1e-9,
        divergence: 1e12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
