use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gaussian_vector, normalized, unit_vector, BoundaryPoint, BoundaryTag, Membership, SetError};
use crate::numerics::{back_substitute_transpose, cholesky, dot, norm2, sym_eig, EigenResult, Matrix};

const DEFINITENESS_BAND: f64 = 1e-10;

fn check_symmetric(q: &Matrix) -> Result<(), SetError> {
    if !q.is_square() || q.rows() == 0 {
        return Err(SetError::Invalid(format!("Q must be square, got {}x{}", q.rows(), q.cols())));
    }
    let asym = q.asymmetry();
    if asym > 1e-9 * (1.0 + q.norm_inf()) {
        return Err(SetError::Invalid(format!("Q is not symmetric (asymmetry {asym:e})")));
    }
    Ok(())
}

fn to_eigenbasis(eig: &EigenResult, x: &[f64]) -> Vec<f64> {
    eig.vectors.tr_matvec(x)
}

fn from_eigenbasis(eig: &EigenResult, y: &[f64]) -> Vec<f64> {
    eig.vectors.matvec(y)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `{x : xᵀ Q x ≤ 1}` with `Q` symmetric positive definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEllipsoid", into = "RawEllipsoid")]
pub struct Ellipsoid {
    q: Matrix,
    chol: Matrix,
    eig: EigenResult,
}

#[derive(Serialize, Deserialize)]
struct RawEllipsoid {
    #[serde(rename = "Q")]
    q: Matrix,
}

impl TryFrom<RawEllipsoid> for Ellipsoid {
    type Error = SetError;

    fn try_from(raw: RawEllipsoid) -> Result<Self, SetError> {
        Ellipsoid::new(raw.q)
    }
}

impl From<Ellipsoid> for RawEllipsoid {
    fn from(e: Ellipsoid) -> Self {
        RawEllipsoid { q: e.q }
    }
}

impl Ellipsoid {
    pub fn new(q: Matrix) -> Result<Self, SetError> {
        check_symmetric(&q)?;
        let q = q.symmetrized();
        let eig = sym_eig(&q)?;
        if eig.min() <= DEFINITENESS_BAND {
            return Err(SetError::Invalid(format!(
                "Q must be positive definite (smallest eigenvalue {:e})",
                eig.min()
            )));
        }
        let chol = cholesky(&q)?;
        Ok(Self { q, chol, eig })
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn excess(&self, x: &[f64]) -> f64 {
        0.5 * (self.q.quadratic_form(x) - 1.0)
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

    pub(crate) fn inward_direction(&self, x: &[f64]) -> Vec<f64> {
        self.q.matvec(x).iter().map(|v| -v).collect()
    }

    /// Boundary points `L⁻ᵀ u / ‖u‖` for Gaussian `u`, where `Q = L Lᵀ`.
    pub(crate) fn sample_boundary(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<BoundaryPoint> {
        (0..count)
            .map(|_| {
                let u = unit_vector(rng, self.dim());
                BoundaryPoint {
                    point: back_substitute_transpose(&self.chol, &u),
                    tag: BoundaryTag::QuadraticSurface,
                }
            })
            .collect()
    }

    /// Nearest point: `x = (I + μQ)⁻¹ p` with `μ ≥ 0` chosen so that
    /// `xᵀQx = 1`, found by bisection in the eigenbasis of `Q`.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>, SetError> {
        if self.excess(p) <= 0.0 {
            return Ok(p.to_vec());
        }
        let pt = to_eigenbasis(&self.eig, p);
        let lam = &self.eig.values;
        let phi = |mu: f64| -> f64 {
            lam.iter()
                .zip(&pt)
                .map(|(l, v)| l * v * v / ((1.0 + mu * l) * (1.0 + mu * l)))
                .sum::<f64>()
                - 1.0
        };
        let hi = lam.iter().zip(&pt).map(|(l, v)| v * v / l).sum::<f64>().sqrt();
        let mu = bisect(phi, 0.0, hi.max(1e-300));
        let xt: Vec<f64> = lam.iter().zip(&pt).map(|(l, v)| v / (1.0 + mu * l)).collect();
        let x = from_eigenbasis(&self.eig, &xt);
        let s = self.q.quadratic_form(&x).sqrt();
        Ok(x.iter().map(|v| v / s).collect())
    }
}

/// `{x : xᵀ Q x ≤ 0, xᵀ Q u_n ≤ 0}` for `Q` with exactly one negative
/// eigenvalue and eigenvector `u_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLorenz", into = "RawLorenz")]
pub struct LorenzCone {
    q: Matrix,
    u_n: Vec<f64>,
    eig: EigenResult,
}

#[derive(Serialize, Deserialize)]
struct RawLorenz {
    #[serde(rename = "Q")]
    q: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u_n: Option<Vec<f64>>,
}

impl TryFrom<RawLorenz> for LorenzCone {
    type Error = SetError;

    fn try_from(raw: RawLorenz) -> Result<Self, SetError> {
        LorenzCone::new(raw.q, raw.u_n)
    }
}

impl From<LorenzCone> for RawLorenz {
    fn from(c: LorenzCone) -> Self {
        RawLorenz {
            q: c.q,
            u_n: Some(c.u_n),
        }
    }
}

impl LorenzCone {
    /// Validates the inertia `{n-1, 0, 1}`. Without an explicit `u_n`, the
    /// negative eigenvector is signed so that its largest-magnitude entry
    /// (lowest index on ties) is positive. A supplied `u_n` must match that
    /// eigenvector up to sign and is normalized.
    pub fn new(q: Matrix, u_n: Option<Vec<f64>>) -> Result<Self, SetError> {
        check_symmetric(&q)?;
        let q = q.symmetrized();
        let n = q.rows();
        if n < 2 {
            return Err(SetError::Invalid("Lorenz cones need dimension at least 2".into()));
        }
        let eig = sym_eig(&q)?;
        let (pos, zero, neg) = eig.inertia(DEFINITENESS_BAND);
        if (pos, zero, neg) != (n - 1, 0, 1) {
            return Err(SetError::Invalid(format!(
                "Q must have inertia ({}, 0, 1), got ({pos}, {zero}, {neg})",
                n - 1
            )));
        }
        let mut u = eig.vector(n - 1);
        match u_n {
            Some(given) => {
                if given.len() != n {
                    return Err(SetError::DimensionMismatch {
                        expected: n,
                        got: given.len(),
                    });
                }
                let given = normalized(given);
                let c = dot(&given, &u);
                if c.abs() < 1.0 - 1e-6 {
                    return Err(SetError::Invalid(
                        "u_n is not the eigenvector of the negative eigenvalue".into(),
                    ));
                }
                u = given;
            }
            None => {
                let mut lead = 0;
                for k in 1..n {
                    if u[k].abs() > u[lead].abs() + 1e-12 {
                        lead = k;
                    }
                }
                if u[lead] < 0.0 {
                    u.iter_mut().for_each(|v| *v = -*v);
                }
            }
        }
        Ok(Self { q, u_n: u, eig })
    }

    /// Standard second-order cone `‖x_{1..n-1}‖ ≤ x_n`.
    pub fn standard(n: usize) -> Result<Self, SetError> {
        let mut d = vec![1.0; n];
        if let Some(last) = d.last_mut() {
            *last = -1.0;
        }
        Self::new(Matrix::diag(&d), None)
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn u_n(&self) -> &[f64] {
        &self.u_n
    }

    pub fn negative_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    fn scaled_forms(&self, x: &[f64]) -> (f64, f64) {
        let nx2 = dot(x, x);
        let (mut quad, mut lin) = (0.0, 0.0);
        for (i, (xi, ui)) in x.iter().zip(&self.u_n).enumerate() {
            let r = dot(self.q.row(i), x);
            quad += xi * r;
            lin += ui * r;
        }
        (quad / nx2.max(1.0), lin / nx2.sqrt().max(1.0))
    }

    pub fn excess(&self, x: &[f64]) -> f64 {
        let (quad, lin) = self.scaled_forms(x);
        quad.max(lin)
    }

    pub fn membership_with(&self, x: &[f64], band: f64) -> Membership {
        let (quad, lin) = self.scaled_forms(x);
        if quad > band || lin > band {
            Membership::Outside
        } else if quad >= -band || lin >= -band {
            Membership::Boundary
        } else {
            Membership::Inside
        }
    }

    pub fn is_apex(&self, x: &[f64], band: f64) -> bool {
        norm2(x) <= band
    }

    pub(crate) fn inward_direction(&self, x: &[f64], tag: &BoundaryTag) -> Vec<f64> {
        if *tag == BoundaryTag::Apex || norm2(x) == 0.0 {
            return self.u_n.clone();
        }
        self.q.matvec(x).iter().map(|v| -v).collect()
    }

    /// The apex first, then unit-norm surface points built from the
    /// eigendecomposition: `Σ a_k u_k/√λ_k + u_n/√(-λ_n)` with `‖a‖ = 1`.
    pub(crate) fn sample_boundary(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<BoundaryPoint> {
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        out.push(BoundaryPoint {
            point: vec![0.0; n],
            tag: BoundaryTag::Apex,
        });
        let lam_n = self.negative_eigenvalue();
        while out.len() < count {
            let a = loop {
                let g = gaussian_vector(rng, n - 1);
                if norm2(&g) > 1e-12 {
                    break normalized(g);
                }
            };
            let mut x: Vec<f64> = self.u_n.iter().map(|v| v / (-lam_n).sqrt()).collect();
            for k in 0..n - 1 {
                let scale = a[k] / self.eig.values[k].sqrt();
                for (xi, ui) in x.iter_mut().zip(self.eig.vectors.column(k)) {
                    *xi += scale * ui;
                }
            }
            out.push(BoundaryPoint {
                point: normalized(x),
                tag: BoundaryTag::QuadraticSurface,
            });
        }
        out
    }

    /// Nearest point. Candidates are the apex and every `x = (I + μQ)⁻¹ p`
    /// on the surface `xᵀQx = 0`; the roots in `μ` are bracketed on a grid
    /// on both sides of the pole `μ = 1/|λ_n|` and refined by bisection.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>, SetError> {
        if self.excess(p) <= 0.0 {
            return Ok(p.to_vec());
        }
        let n = self.dim();
        let pt = to_eigenbasis(&self.eig, p);
        let lam = &self.eig.values;
        let pole = 1.0 / lam[n - 1].abs();
        let g = |mu: f64| -> f64 {
            lam.iter()
                .zip(&pt)
                .map(|(l, v)| l * v * v / ((1.0 + mu * l) * (1.0 + mu * l)))
                .sum()
        };
        let below = |s: f64| pole * s;
        let above = |s: f64| pole / s;

        let mut best = vec![0.0; n];
        let mut best_d = norm2(p);
        let mut consider = |x: Vec<f64>| {
            if self.excess(&x) <= 1e-9 {
                let d = norm2(&crate::numerics::sub(p, &x));
                if d < best_d {
                    best_d = d;
                    best = x;
                }
            }
        };
        // At the pole the last coordinate is free; this is where the
        // projection lands when p has no component along u_n. Any feasible
        // candidate is safe to include.
        let mut xt: Vec<f64> = lam.iter().zip(&pt).map(|(l, v)| v / (1.0 + pole * l)).collect();
        let rest: f64 = (0..n - 1).map(|k| lam[k] * xt[k] * xt[k]).sum();
        for sign in [1.0, -1.0] {
            xt[n - 1] = sign * (rest / lam[n - 1].abs()).sqrt();
            consider(from_eigenbasis(&self.eig, &xt));
        }
        const GRID: usize = 4000;
        let grid: Vec<f64> = (1..GRID)
            .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / GRID as f64).cos()))
            .collect();
        for map in [&below as &dyn Fn(f64) -> f64, &above] {
            let h = |s: f64| g(map(s));
            for w in grid.windows(2) {
                let (a, b) = (w[0], w[1]);
                if (h(a) > 0.0) == (h(b) > 0.0) {
                    continue;
                }
                let mu = map(bisect(h, a, b));
                let xt: Vec<f64> = lam.iter().zip(&pt).map(|(l, v)| v / (1.0 + mu * l)).collect();
                consider(from_eigenbasis(&self.eig, &xt));
            }
        }
        Ok(best)
    }
}
