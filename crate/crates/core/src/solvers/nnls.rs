//! Lawson–Hanson nonnegative least squares and the problems built on it:
//! the nearest-point model for vertex conditions and Euclidean projections
//! onto H-polyhedra, V-polytopes and V-cones.

use serde::{Deserialize, Serialize};

use super::feasibility::{OptResult, OptStatus};
use super::SolverError;
use crate::numerics::{dot, least_squares, norm2, norm_inf, Matrix};

/// Solves `min ‖A x - b‖₂ s.t. x ≥ 0`.
///
/// The iteration budget is ten active-set changes per column.
pub fn nnls(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(SolverError::Dimension(format!("nnls: {m} rows, rhs of length {}", b.len())));
    }
    let mut x = vec![0.0; n];
    if n == 0 {
        return Ok(x);
    }
    let scale = (a.frobenius_norm() * (1.0 + norm2(b))).max(f64::MIN_POSITIVE);
    let tol = 1e-13 * scale;
    let limit = 10 * n.max(1);
    let mut changes = 0;
    let mut passive = vec![false; n];
    let mut banned = vec![false; n];

    loop {
        let residual = residual(a, &x, b);
        let w = a.tr_matvec(&residual);
        let enter = (0..n)
            .filter(|&j| !passive[j] && !banned[j] && w[j] > tol)
            .fold(None, |best: Option<usize>, j| match best {
                Some(k) if w[k] >= w[j] => Some(k),
                _ => Some(j),
            });
        let Some(j) = enter else {
            return Ok(x);
        };
        passive[j] = true;
        changes += 1;

        // Inner loop: keep the passive solution strictly positive.
        loop {
            if changes > limit {
                return Err(SolverError::IterationLimit(limit));
            }
            let z = match solve_passive(a, b, &passive) {
                Some(z) => z,
                None => {
                    passive[j] = false;
                    banned[j] = true;
                    break;
                }
            };
            if z[j] <= 0.0 && x[j] == 0.0 {
                // Newly entered column makes no progress: numerically dependent.
                passive[j] = false;
                banned[j] = true;
                break;
            }
            if (0..n).all(|k| !passive[k] || z[k] > 0.0) {
                x = z;
                banned.iter_mut().for_each(|b| *b = false);
                break;
            }
            let step = (0..n)
                .filter(|&k| passive[k] && z[k] <= 0.0)
                .map(|k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            for k in 0..n {
                x[k] += step * (z[k] - x[k]);
                if passive[k] && x[k] <= 1e-15 * (1.0 + norm_inf(&z)) {
                    x[k] = 0.0;
                    passive[k] = false;
                    changes += 1;
                }
            }
        }
    }
}

fn residual(a: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

fn solve_passive(a: &Matrix, b: &[f64], passive: &[bool]) -> Option<Vec<f64>> {
    let cols: Vec<usize> = (0..a.cols()).filter(|&j| passive[j]).collect();
    let sub = Matrix::from_columns(&cols.iter().map(|&j| a.column(j)).collect::<Vec<_>>()).ok()?;
    let coeffs = least_squares(&sub, b).ok()?;
    let mut z = vec![0.0; a.cols()];
    for (k, &j) in cols.iter().enumerate() {
        z[j] = coeffs[k];
    }
    Some(z)
}

/// Nearest-point model for a vertex condition: minimize `½‖Xα - f‖²`
/// subject to `eᵀα = 0` and `α_j ≥ 0` for `j ≠ free_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub x: Matrix,
    pub f: Vec<f64>,
    pub free_index: usize,
}

/// Substitutes `α_i = -Σ_{j≠i} α_j`, leaving plain NNLS over the edge
/// directions `x^j - x^i`. Multipliers are stored with `η_i` (the equality
/// multiplier) at `free_index` and the sign multipliers `η_j` elsewhere.
pub fn qp_nearest(p: &QpProblem) -> Result<OptResult, SolverError> {
    let (n, l) = (p.x.rows(), p.x.cols());
    if p.f.len() != n || p.free_index >= l {
        return Err(SolverError::Dimension(format!(
            "qp: X is {n}x{l}, f has {}, free index {}",
            p.f.len(),
            p.free_index
        )));
    }
    let i = p.free_index;
    let xi = p.x.column(i);
    let others: Vec<usize> = (0..l).filter(|&j| j != i).collect();
    let mut alpha = vec![0.0; l];
    if !others.is_empty() {
        let edges: Vec<Vec<f64>> = others
            .iter()
            .map(|&j| p.x.column(j).iter().zip(&xi).map(|(a, b)| a - b).collect())
            .collect();
        let d = Matrix::from_columns(&edges).map_err(SolverError::from)?;
        let beta = nnls(&d, &p.f)?;
        for (k, &j) in others.iter().enumerate() {
            alpha[j] = beta[k];
        }
        alpha[i] = -beta.iter().sum::<f64>();
    }
    let r: Vec<f64> = p.x.matvec(&alpha).iter().zip(&p.f).map(|(a, b)| a - b).collect();
    let eta_i = -dot(&xi, &r);
    let multipliers = (0..l)
        .map(|j| if j == i { eta_i } else { dot(&p.x.column(j), &r) + eta_i })
        .collect();
    Ok(OptResult {
        status: OptStatus::Optimal,
        alpha,
        multipliers,
        objective: 0.5 * dot(&r, &r),
    })
}

/// Residual norms of the first-order system: stationarity, equality,
/// sign (both `α_j` and `η_j` for `j ≠ i`) and complementarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub equality: f64,
    pub sign: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.stationarity, self.equality, self.sign, self.complementarity]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

pub fn kkt_residuals(p: &QpProblem, r: &OptResult) -> KktResiduals {
    let i = p.free_index;
    let l = p.x.cols();
    let resid: Vec<f64> = p.x.matvec(&r.alpha).iter().zip(&p.f).map(|(a, b)| a - b).collect();
    let grad = p.x.tr_matvec(&resid);
    let eta = &r.multipliers;
    let stationarity = (0..l)
        .map(|j| {
            let mult = if j == i { eta[i] } else { eta[i] - eta[j] };
            (grad[j] + mult).abs()
        })
        .fold(0.0, f64::max);
    let equality = r.alpha.iter().sum::<f64>().abs();
    let sign = (0..l)
        .filter(|&j| j != i)
        .map(|j| (-r.alpha[j]).max(-eta[j]).max(0.0))
        .fold(0.0, f64::max);
    let complementarity = (0..l)
        .filter(|&j| j != i)
        .map(|j| eta[j] * r.alpha[j])
        .sum::<f64>()
        .abs();
    KktResiduals {
        stationarity,
        equality,
        sign,
        complementarity,
    }
}

/// Projection of `p` onto `{x : G x ≤ b}` as a least-distance program.
/// Returns `None` when the polyhedron is empty.
pub fn ldp_project(g: &Matrix, b: &[f64], p: &[f64]) -> Result<Option<Vec<f64>>, SolverError> {
    let (m, n) = (g.rows(), g.cols());
    if b.len() != m || p.len() != n {
        return Err(SolverError::Dimension("ldp: inconsistent dimensions".into()));
    }
    let h: Vec<f64> = g.matvec(p).iter().zip(b).map(|(gp, bi)| gp - bi).collect();
    if h.iter().all(|&v| v <= 0.0) {
        return Ok(Some(p.to_vec()));
    }
    // min ‖w‖ s.t. (-G) w ≥ h, with w = x - p.
    let mut e = Matrix::zeros(n + 1, m);
    for k in 0..m {
        for i in 0..n {
            e[(i, k)] = -g[(k, i)];
        }
        e[(n, k)] = h[k];
    }
    let mut target = vec![0.0; n + 1];
    target[n] = 1.0;
    let u = nnls(&e, &target)?;
    let r: Vec<f64> = e.matvec(&u).iter().zip(&target).map(|(a, t)| a - t).collect();
    if r[n].abs() <= 1e-12 {
        return Ok(None);
    }
    Ok(Some((0..n).map(|i| p[i] - r[i] / r[n]).collect()))
}

/// Projection of `p` onto the convex hull of the columns of `v`.
///
/// NNLS on `[V - p eᵀ; eᵀ] u ≈ e_{n+1}`; with `s = Σu` the optimal weights
/// are `u / s` and the squared distance is `(1 - s) / s`.
pub fn hull_project(v: &Matrix, p: &[f64]) -> Result<Vec<f64>, SolverError> {
    let (n, l) = (v.rows(), v.cols());
    if p.len() != n || l == 0 {
        return Err(SolverError::Dimension("hull: inconsistent dimensions".into()));
    }
    let mut a = Matrix::zeros(n + 1, l);
    for j in 0..l {
        for i in 0..n {
            a[(i, j)] = v[(i, j)] - p[i];
        }
        a[(n, j)] = 1.0;
    }
    let mut target = vec![0.0; n + 1];
    target[n] = 1.0;
    let u = nnls(&a, &target)?;
    let s: f64 = u.iter().sum();
    if s <= 0.0 {
        return Err(SolverError::NumericalFailure("hull projection lost all weight".into()));
    }
    let theta: Vec<f64> = u.iter().map(|ui| ui / s).collect();
    Ok(v.matvec(&theta))
}

/// Projection of `p` onto the cone generated by the columns of `r`.
pub fn cone_project(r: &Matrix, p: &[f64]) -> Result<Vec<f64>, SolverError> {
    if p.len() != r.rows() {
        return Err(SolverError::Dimension("cone: inconsistent dimensions".into()));
    }
    let theta = nnls(r, p)?;
    Ok(r.matvec(&theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn triangle() -> Matrix {
        Matrix::from_columns(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn nnls_clips_negative_coordinate() {
        let a = Matrix::identity(2);
        let x = nnls(&a, &[1.0, -2.0]).unwrap();
        assert_eq!(x, vec![1.0, 0.0]);
    }

    #[test]
    fn nnls_classic_instance() {
        // Unconstrained solution has a negative entry; the NNLS optimum
        // sits on the face x2 = 0.
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let x = nnls(&a, &[2.0, 1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.5, epsilon = 1e-12);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn qp_outward_direction_clips_coefficient() {
        let p = QpProblem {
            x: triangle(),
            f: vec![-1.0, -1.0],
            free_index: 1,
        };
        let r = qp_nearest(&p).unwrap();
        assert!(r.objective > 1e-3);
        assert_eq!(r.alpha[2], 0.0);
        assert!(kkt_residuals(&p, &r).max() <= 1e-7);
    }

    #[test]
    fn qp_generator_and_zero_field() {
        let x = triangle();
        let p = QpProblem {
            x: x.clone(),
            f: vec![-1.0, 1.0],
            free_index: 1,
        };
        let r = qp_nearest(&p).unwrap();
        assert!(r.objective <= 1e-24);
        assert_abs_diff_eq!(r.alpha[2], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.alpha[1], -1.0, epsilon = 1e-12);
        let p = QpProblem {
            x,
            f: vec![0.0, 0.0],
            free_index: 0,
        };
        let r = qp_nearest(&p).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(r.alpha.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn kkt_equality_and_complementarity_residuals() {
        let p = QpProblem {
            x: triangle(),
            f: vec![-1.0, -1.0],
            free_index: 1,
        };
        let mut r = qp_nearest(&p).unwrap();
        r.alpha[1] += 0.1;
        assert_abs_diff_eq!(kkt_residuals(&p, &r).equality, 0.1, epsilon = 1e-12);

        let mut r = qp_nearest(&p).unwrap();
        r.multipliers[0] += 0.3;
        let direct: f64 = [0usize, 2].iter().map(|&j| r.multipliers[j] * r.alpha[j]).sum();
        let res = kkt_residuals(&p, &r);
        assert!(res.complementarity > 0.0);
        assert_abs_diff_eq!(res.complementarity, direct.abs(), epsilon = 1e-15);
    }

    #[test]
    fn projections_onto_unit_square() {
        let g = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap();
        let b = [1.0, 1.0, 0.0, 0.0];
        let x = ldp_project(&g, &b, &[2.0, 3.0]).unwrap().unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-12);
        let x = ldp_project(&g, &b, &[0.5, -2.0]).unwrap().unwrap();
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-12);

        let v = Matrix::from_columns(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let x = hull_project(&v, &[0.5, -2.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-10);
        let x = hull_project(&v, &[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(x[0], 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(x[1], 0.75, epsilon = 1e-10);
    }

    #[test]
    fn empty_polyhedron_detected() {
        let g = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        assert_eq!(ldp_project(&g, &[-1.0, -1.0], &[0.0]).unwrap(), None);
    }

    #[test]
    fn cone_projection() {
        let r = Matrix::identity(2);
        let x = cone_project(&r, &[-1.0, 2.0]).unwrap();
        assert_eq!(x, vec![0.0, 2.0]);
    }
}
