//! Tangent cones at boundary points and membership of vectors in them.
//!
//! At a point of an H-polyhedron the cone is cut out by the active rows.
//! For V-forms it is generated by the directions towards the other
//! vertices (or by the other rays plus the line through the point). For
//! smooth quadratic boundaries it is the halfspace with normal `Qx`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{dot, norm2, norm_inf, sub, Matrix};
use crate::sets::{BoundaryPoint, BoundaryTag, ConvexSet, Ellipsoid, HPolyhedron, LorenzCone, Membership, SetError, VCone, VPolytope};
use crate::solvers::{nnls, LinearProgram, LpStatus, SolverError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TangentError {
    #[error("point is outside the set")]
    NotMember,
    #[error("index {index} out of range for {len} generators")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("the apex of a Lorenz cone has no supporting halfspace")]
    ApexPoint,
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TangentCone {
    /// `{y : gᵀy ≤ 0 for every normal g}`.
    Halfspaces { normals: Vec<Vec<f64>> },
    /// Nonnegative combinations of `generators` plus any multiple of `free`.
    Generated {
        generators: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        free: Option<Vec<f64>>,
    },
    /// `{y : q_normalᵀ y ≤ 0}`.
    QuadraticHalfspace { q_normal: Vec<f64> },
    FullSpace { dim: usize },
    /// The Lorenz cone itself, which is its own tangent cone at the apex.
    SecondOrder {
        #[serde(rename = "Q")]
        q: Matrix,
        u_n: Vec<f64>,
    },
}

/// Sets whose boundary is a level set of a quadratic form.
pub trait QuadraticSet {
    fn q(&self) -> &Matrix;
    fn is_apex(&self, x: &[f64]) -> bool;
    fn membership(&self, x: &[f64]) -> Membership;
}

impl QuadraticSet for Ellipsoid {
    fn q(&self) -> &Matrix {
        Ellipsoid::q(self)
    }

    fn is_apex(&self, _x: &[f64]) -> bool {
        false
    }

    fn membership(&self, x: &[f64]) -> Membership {
        self.membership_with(x, crate::Tolerances::DEFAULT.boundary)
    }
}

impl QuadraticSet for LorenzCone {
    fn q(&self) -> &Matrix {
        LorenzCone::q(self)
    }

    fn is_apex(&self, x: &[f64]) -> bool {
        LorenzCone::is_apex(self, x, crate::Tolerances::DEFAULT.boundary)
    }

    fn membership(&self, x: &[f64]) -> Membership {
        self.membership_with(x, crate::Tolerances::DEFAULT.boundary)
    }
}

/// Halfspace cone from the rows of `G` active at `x`; the whole space when
/// none are active.
pub fn tangent_h(p: &HPolyhedron, x: &[f64]) -> Result<TangentCone, TangentError> {
    if x.len() != p.dim() {
        return Err(SetError::DimensionMismatch {
            expected: p.dim(),
            got: x.len(),
        }
        .into());
    }
    if p.membership_with(x, crate::Tolerances::DEFAULT.boundary) == Membership::Outside {
        return Err(TangentError::NotMember);
    }
    Ok(halfspaces_from_rows(p, &p.active_constraints(x)))
}

fn halfspaces_from_rows(p: &HPolyhedron, active: &[usize]) -> TangentCone {
    if active.is_empty() {
        return TangentCone::FullSpace { dim: p.dim() };
    }
    TangentCone::Halfspaces {
        normals: active.iter().map(|&i| p.g().row(i).to_vec()).collect(),
    }
}

/// Generators `x^j - x^i` for `j ≠ i`.
pub fn tangent_polytope(p: &VPolytope, i: usize) -> Result<TangentCone, TangentError> {
    if i >= p.num_vertices() {
        return Err(TangentError::IndexOutOfRange {
            index: i,
            len: p.num_vertices(),
        });
    }
    let xi = p.vertex(i);
    Ok(TangentCone::Generated {
        generators: (0..p.num_vertices())
            .filter(|&j| j != i)
            .map(|j| sub(p.vertex(j), xi))
            .collect(),
        free: None,
    })
}

/// Generators `x^j - x` at an arbitrary point of the polytope.
pub fn tangent_polytope_at(p: &VPolytope, x: &[f64]) -> TangentCone {
    let scale = 1e-12 * (1.0 + norm_inf(x));
    TangentCone::Generated {
        generators: p
            .vertices()
            .iter()
            .map(|v| sub(v, x))
            .filter(|d| norm2(d) > scale)
            .collect(),
        free: None,
    }
}

/// Ray `x^i` with a free coefficient, the other rays nonnegative.
pub fn tangent_vcone(c: &VCone, i: usize) -> Result<TangentCone, TangentError> {
    if i >= c.num_rays() {
        return Err(TangentError::IndexOutOfRange {
            index: i,
            len: c.num_rays(),
        });
    }
    Ok(TangentCone::Generated {
        generators: (0..c.num_rays()).filter(|&j| j != i).map(|j| c.ray(j).to_vec()).collect(),
        free: Some(c.ray(i).to_vec()),
    })
}

/// All rays plus the line through `x`; the cone itself at the origin.
pub fn tangent_vcone_at(c: &VCone, x: &[f64]) -> TangentCone {
    TangentCone::Generated {
        generators: c.rays().to_vec(),
        free: (norm2(x) > 0.0).then(|| x.to_vec()),
    }
}

/// Halfspace with outer normal `Qx`.
pub fn tangent_quadratic<S: QuadraticSet>(s: &S, x: &[f64]) -> Result<TangentCone, TangentError> {
    if s.membership(x) == Membership::Outside {
        return Err(TangentError::NotMember);
    }
    if s.is_apex(x) {
        return Err(TangentError::ApexPoint);
    }
    Ok(TangentCone::QuadraticHalfspace {
        q_normal: s.q().matvec(x),
    })
}

/// Tangent cone at a tagged boundary point of any set family.
pub fn tangent_at(s: &ConvexSet, bp: &BoundaryPoint) -> Result<TangentCone, TangentError> {
    let x = &bp.point;
    s.check_dim(x)?;
    match (s, &bp.tag) {
        (ConvexSet::Hpolyhedron(p), BoundaryTag::Facets(active)) => Ok(halfspaces_from_rows(p, active)),
        (ConvexSet::Hpolyhedron(p), _) => tangent_h(p, x),
        (ConvexSet::Vpolytope(p), BoundaryTag::Vertex(i)) => tangent_polytope(p, *i),
        (ConvexSet::Vpolytope(p), _) => Ok(tangent_polytope_at(p, x)),
        (ConvexSet::Vcone(c), BoundaryTag::Ray(i)) => {
            // Tag refers to the direction; a scaled ray has the same cone.
            tangent_vcone(c, *i)
        }
        (ConvexSet::Vcone(c), _) => Ok(tangent_vcone_at(c, x)),
        (ConvexSet::Ellipsoid(e), _) => tangent_quadratic(e, x),
        (ConvexSet::Lorenz(c), BoundaryTag::Apex) => Ok(TangentCone::SecondOrder {
            q: c.q().clone(),
            u_n: c.u_n().to_vec(),
        }),
        (ConvexSet::Lorenz(c), _) => tangent_quadratic(c, x),
    }
}

/// Classifies `x` and returns the tangent cone there. Interior points get
/// the whole space.
pub fn tangent_at_point(s: &ConvexSet, x: &[f64]) -> Result<TangentCone, TangentError> {
    match s.membership(x)? {
        Membership::Outside => Err(TangentError::NotMember),
        Membership::Inside => Ok(TangentCone::FullSpace { dim: s.dim() }),
        Membership::Boundary => tangent_at(s, &s.boundary_point(x)?),
    }
}

impl TangentCone {
    pub fn is_full_space(&self) -> bool {
        matches!(self, TangentCone::FullSpace { .. })
    }

    /// Normals, generators or the quadratic normal, whichever applies.
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        match self {
            TangentCone::Halfspaces { normals } => normals.clone(),
            TangentCone::Generated { generators, free } => {
                generators.iter().cloned().chain(free.iter().cloned()).collect()
            }
            TangentCone::QuadraticHalfspace { q_normal } => vec![q_normal.clone()],
            TangentCone::FullSpace { .. } => Vec::new(),
            TangentCone::SecondOrder { u_n, .. } => vec![u_n.clone()],
        }
    }
}

/// Membership of `y` in the cone. The test is applied to `y/‖y‖`, so it
/// is exactly positively homogeneous.
pub fn cone_contains(t: &TangentCone, y: &[f64], tol: f64) -> Result<bool, TangentError> {
    let ny = norm2(y);
    if ny == 0.0 {
        return Ok(true);
    }
    let u: Vec<f64> = y.iter().map(|v| v / ny).collect();
    Ok(match t {
        TangentCone::FullSpace { .. } => true,
        TangentCone::Halfspaces { normals } => normals.iter().all(|g| dot(g, &u) <= tol * (1.0 + norm2(g))),
        TangentCone::QuadraticHalfspace { q_normal } => dot(q_normal, &u) <= tol * (1.0 + norm2(q_normal)),
        TangentCone::SecondOrder { q, u_n } => {
            let scale = 1.0 + q.norm_inf();
            q.quadratic_form(&u) <= tol * scale && q.bilinear(&u, u_n) <= tol * scale
        }
        TangentCone::Generated { generators, free } => generated_residual(generators, free.as_deref(), &u)? <= tol,
    })
}

/// Phase-I residual of `Σ a_j g_j + b·free = u` over `a ≥ 0`.
fn generated_residual(generators: &[Vec<f64>], free: Option<&[f64]>, u: &[f64]) -> Result<f64, TangentError> {
    let k = generators.len();
    let cols = k + usize::from(free.is_some());
    if cols == 0 {
        return Ok(u.iter().map(|v| v.abs()).sum());
    }
    let mut lp = LinearProgram::new(cols);
    if free.is_some() {
        lp.free(k);
    }
    for (r, &ur) in u.iter().enumerate() {
        let mut row: Vec<f64> = generators.iter().map(|g| g[r]).collect();
        if let Some(f) = free {
            row.push(f[r]);
        }
        lp.eq(row, ur);
    }
    lp.feasibility_tolerance(0.0);
    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Infeasible => sol.infeasibility,
        _ => 0.0,
    })
}

/// How far `y` is from satisfying the cone condition: the largest normal
/// product for halfspace cones, the Euclidean distance to a generated cone,
/// zero when `y` is in the cone.
pub fn cone_violation(t: &TangentCone, y: &[f64]) -> Result<f64, TangentError> {
    Ok(match t {
        TangentCone::FullSpace { .. } => 0.0,
        TangentCone::Halfspaces { normals } => normals.iter().map(|g| dot(g, y)).fold(0.0, f64::max),
        TangentCone::QuadraticHalfspace { q_normal } => dot(q_normal, y).max(0.0),
        TangentCone::SecondOrder { q, u_n } => q.quadratic_form(y).max(q.bilinear(y, u_n)).max(0.0),
        TangentCone::Generated { generators, free } => {
            let mut cols: Vec<Vec<f64>> = generators.clone();
            if let Some(f) = free {
                cols.push(f.clone());
                cols.push(f.iter().map(|v| -v).collect());
            }
            if cols.is_empty() {
                norm2(y)
            } else {
                let m = Matrix::from_columns(&cols).map_err(SolverError::from)?;
                let a = nnls(&m, y)?;
                norm2(&sub(y, &m.matvec(&a)))
            }
        }
    })
}
