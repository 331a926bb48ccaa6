use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{unit_vector, BoundaryPoint, BoundaryTag, Membership, SetError};
use crate::config::Tolerances;
use crate::numerics::{norm2, norm_inf, sub, Matrix};
use crate::solvers::{cone_project, hull_project, LinearProgram, LpStatus};

fn check_points(points: &[Vec<f64>], what: &str) -> Result<usize, SetError> {
    let Some(first) = points.first() else {
        return Err(SetError::Invalid(format!("at least one {what} is required")));
    };
    let n = first.len();
    if n == 0 {
        return Err(SetError::Invalid(format!("{what}s must have positive dimension")));
    }
    for (j, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(SetError::Invalid(format!("{what} {j} has dimension {}, expected {n}", p.len())));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(SetError::Invalid(format!("{what} {j} has a non-finite entry")));
        }
    }
    Ok(n)
}

/// Boundary test shared by both V-forms: `x` is interior when every point
/// `x ± δ e_k` stays within the band, with `δ` large enough that a point on
/// a face always pushes at least one of them outside.
fn classify_by_perturbation<F>(x: &[f64], band: f64, excess: F) -> Result<Membership, SetError>
where
    F: Fn(&[f64]) -> Result<f64, SetError>,
{
    if excess(x)? > band {
        return Ok(Membership::Outside);
    }
    let n = x.len();
    let delta = 2.0 * band * (1.0 + norm_inf(x)) * (n as f64).sqrt();
    let mut probe = x.to_vec();
    for k in 0..n {
        for s in [1.0, -1.0] {
            probe[k] = x[k] + s * delta;
            if excess(&probe)? > band {
                return Ok(Membership::Boundary);
            }
        }
        probe[k] = x[k];
    }
    Ok(Membership::Inside)
}

/// Convex hull of finitely many points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVPolytope", into = "RawVPolytope")]
pub struct VPolytope {
    vertices: Vec<Vec<f64>>,
    matrix: Matrix,
}

#[derive(Serialize, Deserialize)]
struct RawVPolytope {
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<RawVPolytope> for VPolytope {
    type Error = SetError;

    fn try_from(raw: RawVPolytope) -> Result<Self, SetError> {
        VPolytope::new(raw.vertices)
    }
}

impl From<VPolytope> for RawVPolytope {
    fn from(p: VPolytope) -> Self {
        RawVPolytope { vertices: p.vertices }
    }
}

impl VPolytope {
    /// Points must share a dimension and be pairwise distinct beyond 1e-9.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self, SetError> {
        check_points(&vertices, "vertex")?;
        for i in 0..vertices.len() {
            for j in 0..i {
                if norm2(&sub(&vertices[i], &vertices[j])) <= 1e-9 {
                    return Err(SetError::Invalid(format!("vertices {j} and {i} coincide")));
                }
            }
        }
        let matrix = Matrix::from_columns(&vertices)?;
        Ok(Self { vertices, matrix })
    }

    /// The `2^n` corners of `[lo, hi]^n`, in binary counting order.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self, SetError> {
        let vertices = (0..1usize << n)
            .map(|mask| (0..n).map(|k| if mask >> k & 1 == 1 { hi } else { lo }).collect())
            .collect();
        Self::new(vertices)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i]
    }

    /// Vertices as matrix columns.
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn centroid(&self) -> Vec<f64> {
        let l = self.num_vertices() as f64;
        (0..self.dim())
            .map(|k| self.vertices.iter().map(|v| v[k]).sum::<f64>() / l)
            .collect()
    }

    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>, SetError> {
        if self.num_vertices() == 1 {
            return Ok(self.vertices[0].clone());
        }
        Ok(hull_project(&self.matrix, p)?)
    }

    /// Euclidean distance to the hull relative to `1 + ‖x‖∞`.
    pub fn excess(&self, x: &[f64]) -> Result<f64, SetError> {
        let q = self.project(x)?;
        Ok(norm2(&sub(x, &q)) / (1.0 + norm_inf(x)))
    }

    pub fn membership_with(&self, x: &[f64], band: f64) -> Result<Membership, SetError> {
        classify_by_perturbation(x, band, |y| self.excess(y))
    }

    pub(crate) fn locate(&self, x: &[f64], band: f64) -> BoundaryTag {
        let scale = band * (1.0 + norm_inf(x));
        match (0..self.num_vertices()).find(|&i| norm2(&sub(x, &self.vertices[i])) <= scale) {
            Some(i) => BoundaryTag::Vertex(i),
            None => BoundaryTag::Face,
        }
    }

    pub(crate) fn inward_direction(&self, x: &[f64]) -> Vec<f64> {
        sub(&self.centroid(), x)
    }

    /// Largest `t ≥ 0` with `origin + t·d` in the hull, and that point.
    fn shoot(&self, origin: &[f64], d: &[f64]) -> Result<Option<Vec<f64>>, SetError> {
        let (n, l) = (self.dim(), self.num_vertices());
        let mut lp = LinearProgram::new(l + 1);
        for k in 0..n {
            let mut row: Vec<f64> = self.vertices.iter().map(|v| v[k]).collect();
            row.push(-d[k]);
            lp.eq(row, origin[k]);
        }
        let mut sum = vec![1.0; l];
        sum.push(0.0);
        lp.eq(sum, 1.0);
        let mut obj = vec![0.0; l + 1];
        obj[l] = 1.0;
        lp.maximize(obj);
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Ok(None);
        }
        let t = sol.x[l];
        Ok(Some(origin.iter().zip(d).map(|(o, dk)| o + t * dk).collect()))
    }

    /// Vertices on the boundary first, then boundary points hit by rays
    /// shot from the centroid in random directions.
    pub(crate) fn sample_boundary(&self, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<BoundaryPoint>, SetError> {
        let band = Tolerances::DEFAULT.boundary;
        let mut out = Vec::with_capacity(count);
        for i in 0..self.num_vertices() {
            if out.len() == count {
                return Ok(out);
            }
            if self.membership_with(&self.vertices[i], band)? == Membership::Boundary {
                out.push(BoundaryPoint {
                    point: self.vertices[i].clone(),
                    tag: BoundaryTag::Vertex(i),
                });
            }
        }
        let c = self.centroid();
        let mut attempts = 0;
        while out.len() < count && attempts < 4 * count {
            attempts += 1;
            let d = unit_vector(rng, self.dim());
            if let Some(x) = self.shoot(&c, &d)? {
                if self.membership_with(&x, band)? == Membership::Boundary {
                    let tag = self.locate(&x, band);
                    out.push(BoundaryPoint { point: x, tag });
                }
            }
        }
        Ok(out)
    }
}

/// Conic hull of finitely many rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVCone", into = "RawVCone")]
pub struct VCone {
    rays: Vec<Vec<f64>>,
    matrix: Matrix,
}

#[derive(Serialize, Deserialize)]
struct RawVCone {
    rays: Vec<Vec<f64>>,
}

impl TryFrom<RawVCone> for VCone {
    type Error = SetError;

    fn try_from(raw: RawVCone) -> Result<Self, SetError> {
        VCone::new(raw.rays)
    }
}

impl From<VCone> for RawVCone {
    fn from(c: VCone) -> Self {
        RawVCone { rays: c.rays }
    }
}

impl VCone {
    /// Rays must share a dimension and have norm at least 1e-9.
    pub fn new(rays: Vec<Vec<f64>>) -> Result<Self, SetError> {
        check_points(&rays, "ray")?;
        if let Some(j) = rays.iter().position(|r| norm2(r) < 1e-9) {
            return Err(SetError::Invalid(format!("ray {j} is zero")));
        }
        let matrix = Matrix::from_columns(&rays)?;
        Ok(Self { rays, matrix })
    }

    /// Nonnegative orthant generated by the unit vectors.
    pub fn orthant(n: usize) -> Self {
        let rays = (0..n)
            .map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(rays).expect("unit vectors form a valid cone")
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn rays(&self) -> &[Vec<f64>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[f64] {
        &self.rays[i]
    }

    /// Rays as matrix columns.
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Sum of the normalized rays.
    pub fn mean_ray(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for r in &self.rays {
            let n = norm2(r);
            m.iter_mut().zip(r).for_each(|(mk, rk)| *mk += rk / n);
        }
        m
    }

    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>, SetError> {
        Ok(cone_project(&self.matrix, p)?)
    }

    pub fn excess(&self, x: &[f64]) -> Result<f64, SetError> {
        let q = self.project(x)?;
        Ok(norm2(&sub(x, &q)) / (1.0 + norm_inf(x)))
    }

    pub fn membership_with(&self, x: &[f64], band: f64) -> Result<Membership, SetError> {
        classify_by_perturbation(x, band, |y| self.excess(y))
    }

    pub(crate) fn locate(&self, x: &[f64], band: f64) -> BoundaryTag {
        let nx = norm2(x);
        if nx <= band {
            return BoundaryTag::Apex;
        }
        let parallel = (0..self.num_rays()).find(|&i| {
            let r = &self.rays[i];
            let nr = norm2(r);
            let diff: Vec<f64> = x.iter().zip(r).map(|(a, b)| a / nx - b / nr).collect();
            norm2(&diff) <= band
        });
        match parallel {
            Some(i) => BoundaryTag::Ray(i),
            None => BoundaryTag::Face,
        }
    }

    pub(crate) fn inward_direction(&self, x: &[f64]) -> Vec<f64> {
        let m = super::normalized(self.mean_ray());
        let nx = norm2(x);
        if nx == 0.0 {
            return m;
        }
        m.iter().zip(x).map(|(mk, xk)| mk - xk / nx).collect()
    }

    fn shoot(&self, origin: &[f64], d: &[f64]) -> Result<Option<Vec<f64>>, SetError> {
        let (n, l) = (self.dim(), self.num_rays());
        let mut lp = LinearProgram::new(l + 1);
        for k in 0..n {
            let mut row: Vec<f64> = self.rays.iter().map(|r| r[k]).collect();
            row.push(-d[k]);
            lp.eq(row, origin[k]);
        }
        let mut obj = vec![0.0; l + 1];
        obj[l] = 1.0;
        lp.maximize(obj);
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Ok(None);
        }
        let t = sol.x[l];
        Ok(Some(origin.iter().zip(d).map(|(o, dk)| o + t * dk).collect()))
    }

    /// Normalized rays on the boundary first, then unit-normalized boundary
    /// points hit by rays shot from the mean ray.
    pub(crate) fn sample_boundary(&self, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<BoundaryPoint>, SetError> {
        let band = Tolerances::DEFAULT.boundary;
        let mut out = Vec::with_capacity(count);
        for i in 0..self.num_rays() {
            if out.len() == count {
                return Ok(out);
            }
            let r = super::normalized(self.rays[i].clone());
            if self.membership_with(&r, band)? == Membership::Boundary {
                out.push(BoundaryPoint {
                    point: r,
                    tag: BoundaryTag::Ray(i),
                });
            }
        }
        let m = super::normalized(self.mean_ray());
        let mut attempts = 0;
        while out.len() < count && attempts < 4 * count {
            attempts += 1;
            let d = unit_vector(rng, self.dim());
            let Some(x) = self.shoot(&m, &d)? else {
                continue;
            };
            if norm2(&x) < 1e-6 {
                continue;
            }
            let x = super::normalized(x);
            if self.membership_with(&x, band)? == Membership::Boundary {
                let tag = self.locate(&x, band);
                out.push(BoundaryPoint { point: x, tag });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn triangle() -> VPolytope {
        VPolytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn triangle_membership() {
        let t = triangle();
        assert_eq!(t.membership_with(&[0.2, 0.2], 1e-8).unwrap(), Membership::Inside);
        assert_eq!(t.membership_with(&[0.5, 0.5], 1e-8).unwrap(), Membership::Boundary);
        assert_eq!(t.membership_with(&[0.0, 0.0], 1e-8).unwrap(), Membership::Boundary);
        assert_eq!(t.membership_with(&[0.6, 0.6], 1e-8).unwrap(), Membership::Outside);
    }

    #[test]
    fn rejects_duplicates_and_ragged() {
        assert!(VPolytope::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(VPolytope::new(vec![vec![0.0, 0.0], vec![1.0]]).is_err());
        assert!(VPolytope::new(vec![]).is_err());
        assert!(VCone::new(vec![vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn triangle_samples_start_with_vertices() {
        let t = triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = t.sample_boundary(10, &mut rng).unwrap();
        assert_eq!(pts.len(), 10);
        for (i, bp) in pts.iter().take(3).enumerate() {
            assert_eq!(bp.tag, BoundaryTag::Vertex(i));
        }
        for bp in &pts {
            assert_eq!(t.membership_with(&bp.point, 1e-8).unwrap(), Membership::Boundary);
        }
    }

    #[test]
    fn cone_membership_and_samples() {
        let c = VCone::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert_eq!(c.membership_with(&[1.0, 1.0, 0.5], 1e-8).unwrap(), Membership::Inside);
        assert_eq!(c.membership_with(&[1.0, 0.0, 0.0], 1e-8).unwrap(), Membership::Boundary);
        assert_eq!(c.membership_with(&[0.0, 0.0, -1.0], 1e-8).unwrap(), Membership::Outside);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = c.sample_boundary(20, &mut rng).unwrap();
        assert_eq!(pts.len(), 20);
        for bp in &pts {
            assert_eq!(c.membership_with(&bp.point, 1e-8).unwrap(), Membership::Boundary);
        }
    }

    #[test]
    fn single_point_polytope_is_all_boundary() {
        let p = VPolytope::new(vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(p.membership_with(&[0.0, 0.0], 1e-8).unwrap(), Membership::Boundary);
    }
}
