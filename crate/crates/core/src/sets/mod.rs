//! Convex set families: H-polyhedra, V-polytopes, V-cones, ellipsoids and
//! Lorenz cones.
//!
//! Every set answers the same questions: which side of the boundary a point
//! lies on, how far outside it is, where its nearest point is, and where
//! boundary points can be drawn from for sampling-based checks.

mod hpoly;
mod quadric;
mod vrep;

pub use hpoly::HPolyhedron;
pub use quadric::{Ellipsoid, LorenzCone};
pub use vrep::{VCone, VPolytope};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::numerics::{norm2, NumericsError};
use crate::solvers::SolverError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("dimension mismatch: set lives in R^{expected}, got a vector of length {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid set: {0}")]
    Invalid(String),
    #[error("no boundary point found; the set may be empty or degenerate")]
    EmptyBoundary,
    #[error("point is not on the boundary of the set")]
    NotOnBoundary,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

/// Which part of the boundary a point sits on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    /// Active rows of an H-polyhedron.
    Facets(Vec<usize>),
    Vertex(usize),
    Ray(usize),
    /// Boundary point of a V-form that is not a listed vertex or ray.
    Face,
    QuadraticSurface,
    /// Origin of a cone.
    Apex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub point: Vec<f64>,
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexSet {
    Hpolyhedron(HPolyhedron),
    Vpolytope(VPolytope),
    Vcone(VCone),
    Ellipsoid(Ellipsoid),
    Lorenz(LorenzCone),
}

impl From<HPolyhedron> for ConvexSet {
    fn from(s: HPolyhedron) -> Self {
        ConvexSet::Hpolyhedron(s)
    }
}

impl From<VPolytope> for ConvexSet {
    fn from(s: VPolytope) -> Self {
        ConvexSet::Vpolytope(s)
    }
}

impl From<VCone> for ConvexSet {
    fn from(s: VCone) -> Self {
        ConvexSet::Vcone(s)
    }
}

impl From<Ellipsoid> for ConvexSet {
    fn from(s: Ellipsoid) -> Self {
        ConvexSet::Ellipsoid(s)
    }
}

impl From<LorenzCone> for ConvexSet {
    fn from(s: LorenzCone) -> Self {
        ConvexSet::Lorenz(s)
    }
}

impl ConvexSet {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Hpolyhedron(s) => s.dim(),
            ConvexSet::Vpolytope(s) => s.dim(),
            ConvexSet::Vcone(s) => s.dim(),
            ConvexSet::Ellipsoid(s) => s.dim(),
            ConvexSet::Lorenz(s) => s.dim(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ConvexSet::Hpolyhedron(_) => "hpolyhedron",
            ConvexSet::Vpolytope(_) => "vpolytope",
            ConvexSet::Vcone(_) => "vcone",
            ConvexSet::Ellipsoid(_) => "ellipsoid",
            ConvexSet::Lorenz(_) => "lorenz",
        }
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<(), SetError> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(SetError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            })
        }
    }

    pub fn membership(&self, x: &[f64]) -> Result<Membership, SetError> {
        self.membership_with(x, Tolerances::DEFAULT.boundary)
    }

    /// Classification with a boundary band of relative width `band`.
    pub fn membership_with(&self, x: &[f64], band: f64) -> Result<Membership, SetError> {
        self.check_dim(x)?;
        match self {
            ConvexSet::Hpolyhedron(s) => Ok(s.membership_with(x, band)),
            ConvexSet::Vpolytope(s) => s.membership_with(x, band),
            ConvexSet::Vcone(s) => s.membership_with(x, band),
            ConvexSet::Ellipsoid(s) => Ok(s.membership_with(x, band)),
            ConvexSet::Lorenz(s) => Ok(s.membership_with(x, band)),
        }
    }

    /// Scale-aware outward violation; a point is Outside exactly when this
    /// exceeds the band. Nonpositive values mean the point is in the set.
    pub fn excess(&self, x: &[f64]) -> Result<f64, SetError> {
        self.check_dim(x)?;
        match self {
            ConvexSet::Hpolyhedron(s) => Ok(s.excess(x)),
            ConvexSet::Vpolytope(s) => s.excess(x),
            ConvexSet::Vcone(s) => s.excess(x),
            ConvexSet::Ellipsoid(s) => Ok(s.excess(x)),
            ConvexSet::Lorenz(s) => Ok(s.excess(x)),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>, SetError> {
        self.check_dim(p)?;
        match self {
            ConvexSet::Hpolyhedron(s) => s.project(p)?.ok_or(SetError::EmptyBoundary),
            ConvexSet::Vpolytope(s) => s.project(p),
            ConvexSet::Vcone(s) => s.project(p),
            ConvexSet::Ellipsoid(s) => s.project(p),
            ConvexSet::Lorenz(s) => s.project(p),
        }
    }

    pub fn distance(&self, p: &[f64]) -> Result<f64, SetError> {
        let q = self.project(p)?;
        Ok(norm2(&crate::numerics::sub(p, &q)))
    }

    /// Classifies `x` and, when it lies on the boundary, names the part of
    /// the boundary it belongs to.
    pub fn boundary_point(&self, x: &[f64]) -> Result<BoundaryPoint, SetError> {
        self.boundary_point_with(x, Tolerances::DEFAULT.boundary)
    }

    pub fn boundary_point_with(&self, x: &[f64], band: f64) -> Result<BoundaryPoint, SetError> {
        if self.membership_with(x, band)? != Membership::Boundary {
            return Err(SetError::NotOnBoundary);
        }
        let tag = match self {
            ConvexSet::Hpolyhedron(s) => BoundaryTag::Facets(s.active_constraints_with(x, band)),
            ConvexSet::Vpolytope(s) => s.locate(x, band),
            ConvexSet::Vcone(s) => s.locate(x, band),
            ConvexSet::Ellipsoid(_) => BoundaryTag::QuadraticSurface,
            ConvexSet::Lorenz(s) => {
                if s.is_apex(x, band) {
                    BoundaryTag::Apex
                } else {
                    BoundaryTag::QuadraticSurface
                }
            }
        };
        Ok(BoundaryPoint { point: x.to_vec(), tag })
    }

    /// Deterministic boundary sample of size `count` (fewer only for
    /// V-forms whose boundary is exhausted by degenerate shots).
    pub fn sample_boundary(&self, count: usize, seed: u64) -> Result<Vec<BoundaryPoint>, SetError> {
        if count == 0 {
            return Err(SetError::Invalid("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = match self {
            ConvexSet::Hpolyhedron(s) => s.sample_boundary(count, &mut rng)?,
            ConvexSet::Vpolytope(s) => s.sample_boundary(count, &mut rng)?,
            ConvexSet::Vcone(s) => s.sample_boundary(count, &mut rng)?,
            ConvexSet::Ellipsoid(s) => s.sample_boundary(count, &mut rng),
            ConvexSet::Lorenz(s) => s.sample_boundary(count, &mut rng),
        };
        if points.is_empty() {
            return Err(SetError::EmptyBoundary);
        }
        Ok(points)
    }

    /// Unit direction pointing into the set from a boundary point.
    pub fn inward_direction(&self, bp: &BoundaryPoint) -> Vec<f64> {
        let d = match self {
            ConvexSet::Hpolyhedron(s) => s.inward_direction(&bp.point, &bp.tag),
            ConvexSet::Vpolytope(s) => s.inward_direction(&bp.point),
            ConvexSet::Vcone(s) => s.inward_direction(&bp.point),
            ConvexSet::Ellipsoid(s) => s.inward_direction(&bp.point),
            ConvexSet::Lorenz(s) => s.inward_direction(&bp.point, &bp.tag),
        };
        normalized(d)
    }
}

pub(crate) fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm2(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

pub(crate) fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub(crate) fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        if norm2(&v) > 1e-12 {
            return normalized(v);
        }
    }
}
