use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{normalized, unit_vector, BoundaryPoint, BoundaryTag, Membership, SetError};
use crate::config::Tolerances;
use crate::numerics::{dot, norm2, Matrix};
use crate::solvers::{ldp_project, LinearProgram, LpStatus};

/// `{x : G x ≤ b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHPolyhedron", into = "RawHPolyhedron")]
pub struct HPolyhedron {
    g: Matrix,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawHPolyhedron {
    #[serde(rename = "G")]
    g: Matrix,
    b: Vec<f64>,
}

impl TryFrom<RawHPolyhedron> for HPolyhedron {
    type Error = SetError;

    fn try_from(raw: RawHPolyhedron) -> Result<Self, SetError> {
        HPolyhedron::new(raw.g, raw.b)
    }
}

impl From<HPolyhedron> for RawHPolyhedron {
    fn from(p: HPolyhedron) -> Self {
        RawHPolyhedron { g: p.g, b: p.b }
    }
}

impl HPolyhedron {
    /// Rows of `g` must be nonzero. Emptiness is not checked here.
    pub fn new(g: Matrix, b: Vec<f64>) -> Result<Self, SetError> {
        if g.rows() == 0 || g.cols() == 0 {
            return Err(SetError::Invalid("G must have at least one row and column".into()));
        }
        if b.len() != g.rows() {
            return Err(SetError::Invalid(format!("G has {} rows but b has {} entries", g.rows(), b.len())));
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(SetError::Invalid(format!("b[{i}] is not finite")));
        }
        if let Some(i) = (0..g.rows()).find(|&i| norm2(g.row(i)) < 1e-12) {
            return Err(SetError::Invalid(format!("row {i} of G is zero")));
        }
        Ok(Self { g, b })
    }

    /// Nonnegative orthant as `-I x ≤ 0`.
    pub fn orthant(n: usize) -> Self {
        Self {
            g: Matrix::identity(n).scale(-1.0),
            b: vec![0.0; n],
        }
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`; rows are the upper bounds first.
    pub fn hyperrectangle(lo: &[f64], hi: &[f64]) -> Result<Self, SetError> {
        let n = lo.len();
        if hi.len() != n || lo.iter().zip(hi).any(|(l, h)| l > h) {
            return Err(SetError::Invalid("box bounds must have equal length with lo ≤ hi".into()));
        }
        let mut g = Matrix::zeros(2 * n, n);
        let mut b = vec![0.0; 2 * n];
        for i in 0..n {
            g[(i, i)] = 1.0;
            b[i] = hi[i];
            g[(n + i, i)] = -1.0;
            b[n + i] = -lo[i];
        }
        Self::new(g, b)
    }

    pub fn dim(&self) -> usize {
        self.g.cols()
    }

    pub fn num_constraints(&self) -> usize {
        self.g.rows()
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    fn scaled_slack(&self, x: &[f64], i: usize) -> f64 {
        (dot(self.g.row(i), x) - self.b[i]) / (1.0 + self.b[i].abs())
    }

    pub fn excess(&self, x: &[f64]) -> f64 {
        (0..self.num_constraints())
            .map(|i| self.scaled_slack(x, i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn membership_with(&self, x: &[f64], band: f64) -> Membership {
        let e = self.excess(x);
        if e > band {
            Membership::Outside
        } else if e >= -band {
            Membership::Boundary
        } else {
            Membership::Inside
        }
    }

    pub fn active_constraints(&self, x: &[f64]) -> Vec<usize> {
        self.active_constraints_with(x, Tolerances::DEFAULT.boundary)
    }

    pub fn active_constraints_with(&self, x: &[f64], band: f64) -> Vec<usize> {
        (0..self.num_constraints())
            .filter(|&i| self.scaled_slack(x, i).abs() <= band)
            .collect()
    }

    /// Nearest point of the polyhedron, `None` when it is empty.
    pub fn project(&self, p: &[f64]) -> Result<Option<Vec<f64>>, SetError> {
        Ok(ldp_project(&self.g, &self.b, p)?)
    }

    pub fn is_empty(&self) -> Result<bool, SetError> {
        let mut lp = LinearProgram::new(self.dim());
        for j in 0..self.dim() {
            lp.free(j);
        }
        for i in 0..self.num_constraints() {
            lp.le(self.g.row(i).to_vec(), self.b[i]);
        }
        Ok(lp.solve()?.status == LpStatus::Infeasible)
    }

    pub(crate) fn inward_direction(&self, x: &[f64], tag: &BoundaryTag) -> Vec<f64> {
        let active = match tag {
            BoundaryTag::Facets(a) if !a.is_empty() => a.clone(),
            _ => self.active_constraints(x),
        };
        let mut d = vec![0.0; self.dim()];
        for i in active {
            let row = self.g.row(i);
            let n = norm2(row);
            for (dk, gk) in d.iter_mut().zip(row) {
                *dk -= gk / n;
            }
        }
        d
    }

    fn sampling_radius(&self) -> f64 {
        let reach = (0..self.num_constraints())
            .map(|i| self.b[i].abs() / norm2(self.g.row(i)))
            .fold(0.0, f64::max);
        10.0 * (1.0 + reach)
    }

    /// Point deepest inside facet `i` within the sampling box, with its
    /// depth. Negative depth means the facet misses the box.
    fn facet_center(&self, i: usize, radius: f64) -> Result<Option<(Vec<f64>, f64)>, SetError> {
        let n = self.dim();
        let mut lp = LinearProgram::new(n + 1);
        for j in 0..=n {
            lp.free(j);
        }
        let mut eq = self.g.row(i).to_vec();
        eq.push(0.0);
        lp.eq(eq, self.b[i]);
        for k in (0..self.num_constraints()).filter(|&k| k != i) {
            let mut row = self.g.row(k).to_vec();
            row.push(norm2(self.g.row(k)));
            lp.le(row, self.b[k]);
        }
        for j in 0..n {
            let mut up = vec![0.0; n + 1];
            up[j] = 1.0;
            up[n] = 1.0;
            lp.le(up.clone(), radius);
            up[j] = -1.0;
            lp.le(up, radius);
        }
        let mut cap = vec![0.0; n + 1];
        cap[n] = 1.0;
        lp.le(cap.clone(), 1.0);
        lp.maximize(cap);
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Ok(None);
        }
        let depth = sol.x[n];
        Ok(Some((sol.x[..n].to_vec(), depth)))
    }

    /// Hit-and-run within each facet (intersected with a sampling box),
    /// distributing samples round-robin over nonempty facets.
    pub(crate) fn sample_boundary(&self, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<BoundaryPoint>, SetError> {
        let radius = self.sampling_radius();
        let band = Tolerances::DEFAULT.boundary;
        let mut walkers = Vec::new();
        for i in 0..self.num_constraints() {
            if let Some((center, depth)) = self.facet_center(i, radius)? {
                if depth >= -1e-9 {
                    walkers.push((i, center, depth > 1e-9));
                }
            }
        }
        if walkers.is_empty() {
            return Err(SetError::EmptyBoundary);
        }
        let mut out = Vec::with_capacity(count);
        let mut misses = 0;
        let mut k = 0;
        while out.len() < count && misses < 10 * count {
            let slot = k % walkers.len();
            k += 1;
            let walker = &mut walkers[slot];
            let (i, movable) = (walker.0, walker.2);
            let x = &mut walker.1;
            if movable {
                self.hit_and_run_step(i, x, radius, rng);
            }
            if self.membership_with(x, band) == Membership::Boundary {
                out.push(BoundaryPoint {
                    point: x.clone(),
                    tag: BoundaryTag::Facets(self.active_constraints(x)),
                });
            } else {
                misses += 1;
            }
        }
        Ok(out)
    }

    fn hit_and_run_step(&self, facet: usize, x: &mut [f64], radius: f64, rng: &mut ChaCha8Rng) {
        let n = self.dim();
        let gi = self.g.row(facet);
        let gg = dot(gi, gi);
        let mut d = unit_vector(rng, n);
        let c = dot(gi, &d) / gg;
        d.iter_mut().zip(gi).for_each(|(dk, gk)| *dk -= c * gk);
        if norm2(&d) < 1e-12 {
            return;
        }
        let d = normalized(d);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut clamp = |slope: f64, slack: f64| {
            // slope * t ≤ slack
            if slope > 1e-14 {
                hi = hi.min(slack / slope);
            } else if slope < -1e-14 {
                lo = lo.max(slack / slope);
            }
        };
        for k in (0..self.num_constraints()).filter(|&k| k != facet) {
            let gk = self.g.row(k);
            clamp(dot(gk, &d), self.b[k] - dot(gk, x));
        }
        for j in 0..n {
            clamp(d[j], radius - x[j]);
            clamp(-d[j], radius + x[j]);
        }
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return;
        }
        let t = lo + rng.random::<f64>() * (hi - lo);
        x.iter_mut().zip(&d).for_each(|(xk, dk)| *xk += t * dk);
        let drift = (dot(gi, x) - self.b[facet]) / gg;
        x.iter_mut().zip(gi).for_each(|(xk, gk)| *xk -= drift * gk);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn unit_box() -> HPolyhedron {
        HPolyhedron::hyperrectangle(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn face_and_corner_points() {
        let p = unit_box();
        assert_eq!(p.membership_with(&[1.0, 0.5], 1e-8), Membership::Boundary);
        assert_eq!(p.active_constraints(&[1.0, 0.5]), vec![0]);
        assert_eq!(p.active_constraints(&[1.0, 1.0]), vec![0, 1]);
        assert!(p.active_constraints(&[0.5, 0.5]).is_empty());
        assert_eq!(p.membership_with(&[0.5, 0.5], 1e-8), Membership::Inside);
        assert_eq!(p.membership_with(&[1.1, 0.5], 1e-8), Membership::Outside);
    }

    #[test]
    fn orthant_face() {
        let p = HPolyhedron::orthant(2);
        assert_eq!(p.active_constraints(&[0.0, 2.0]), vec![0]);
    }

    #[test]
    fn samples_lie_on_facets() {
        let p = unit_box();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = p.sample_boundary(200, &mut rng).unwrap();
        assert_eq!(pts.len(), 200);
        for bp in &pts {
            assert_eq!(p.membership_with(&bp.point, 1e-8), Membership::Boundary);
        }
        let mut seen = [false; 4];
        for bp in &pts {
            if let BoundaryTag::Facets(a) = &bp.tag {
                a.iter().for_each(|&i| seen[i] = true);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn emptiness() {
        let g = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        assert!(HPolyhedron::new(g.clone(), vec![-1.0, -1.0]).unwrap().is_empty().unwrap());
        assert!(!HPolyhedron::new(g, vec![1.0, 1.0]).unwrap().is_empty().unwrap());
    }
}
