//! Coefficient feasibility for vertex and extreme-ray conditions.
//!
//! A vertex condition asks whether the field value at vertex `i` is a
//! nonnegative combination of the edge directions `x^j - x^i`. Writing
//! `α_i = -Σ_{j≠i} α_j` turns it into the linear system
//! `[X; eᵀ] α = [f; 0]` with `α_j ≥ 0` for `j ≠ i` and `α_i` free. Extreme
//! rays of a cone give the same system without the summation row.

use serde::{Deserialize, Serialize};

use super::lp::{LinearProgram, LpStatus};
use super::SolverError;
use crate::config::Tolerances;
use crate::numerics::{dot, norm_inf, solve_linear, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LpFeasibilityProblem {
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
    /// Coefficient exempt from the sign constraint, if any.
    pub free_index: Option<usize>,
}

impl LpFeasibilityProblem {
    /// Vertex system: appends the all-ones row to `points` (columns are
    /// vertices) and a zero to `field`.
    pub fn for_vertex(points: &Matrix, field: &[f64], vertex: usize) -> Result<Self, SolverError> {
        let (n, l) = (points.rows(), points.cols());
        check_dims(n, l, field, vertex)?;
        let mut matrix = Matrix::zeros(n + 1, l);
        for i in 0..n {
            for j in 0..l {
                matrix[(i, j)] = points[(i, j)];
            }
        }
        for j in 0..l {
            matrix[(n, j)] = 1.0;
        }
        let mut rhs = field.to_vec();
        rhs.push(0.0);
        Ok(Self {
            matrix,
            rhs,
            free_index: Some(vertex),
        })
    }

    /// Extreme-ray system: `R α = f` with `α_ray` free.
    pub fn for_ray(rays: &Matrix, field: &[f64], ray: usize) -> Result<Self, SolverError> {
        check_dims(rays.rows(), rays.cols(), field, ray)?;
        Ok(Self {
            matrix: rays.clone(),
            rhs: field.to_vec(),
            free_index: Some(ray),
        })
    }

    pub fn num_coefficients(&self) -> usize {
        self.matrix.cols()
    }

    fn sign_constrained(&self, j: usize) -> bool {
        self.free_index != Some(j)
    }
}

fn check_dims(n: usize, l: usize, field: &[f64], index: usize) -> Result<(), SolverError> {
    if field.len() != n {
        return Err(SolverError::Dimension(format!(
            "field has {} entries, generators live in dimension {n}",
            field.len()
        )));
    }
    if index >= l {
        return Err(SolverError::Dimension(format!("index {index} out of range for {l} generators")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptStatus {
    Feasible,
    Infeasible,
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub status: OptStatus,
    pub alpha: Vec<f64>,
    /// KKT multipliers for nearest-point results; empty for LP results.
    #[serde(default)]
    pub multipliers: Vec<f64>,
    /// LP: phase-I residual (0 when feasible). QP: `½‖Xα - f‖²`.
    pub objective: f64,
}

/// Decides feasibility of the coefficient system.
///
/// Tall systems with independent columns are first tried through the
/// normal equations; a solution that passes the residual and sign checks is
/// accepted directly. Everything else goes through phase-I simplex.
pub fn lp_feasible(p: &LpFeasibilityProblem) -> Result<OptResult, SolverError> {
    let tol = Tolerances::DEFAULT;
    let (rows, cols) = (p.matrix.rows(), p.matrix.cols());
    if p.rhs.len() != rows {
        return Err(SolverError::Dimension("rhs length differs from row count".into()));
    }

    if rows >= cols {
        let xt = p.matrix.transpose();
        let normal = xt.matmul(&p.matrix);
        if let Ok(alpha) = solve_linear(&normal, &xt.matvec(&p.rhs)) {
            if satisfies_system(p, &alpha) {
                return Ok(OptResult {
                    status: OptStatus::Feasible,
                    alpha,
                    multipliers: Vec::new(),
                    objective: 0.0,
                });
            }
        }
    }

    let mut lp = LinearProgram::new(cols);
    if let Some(i) = p.free_index {
        lp.free(i);
    }
    for r in 0..rows {
        lp.eq(p.matrix.row(r).to_vec(), p.rhs[r]);
    }
    lp.feasibility_tolerance(tol.lp_feasibility);
    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Optimal => OptResult {
            status: OptStatus::Feasible,
            alpha: sol.x,
            multipliers: Vec::new(),
            objective: 0.0,
        },
        LpStatus::Infeasible => OptResult {
            status: OptStatus::Infeasible,
            alpha: sol.x,
            multipliers: Vec::new(),
            objective: sol.infeasibility,
        },
        LpStatus::Unbounded => unreachable!("feasibility program has no objective"),
    })
}

fn satisfies_system(p: &LpFeasibilityProblem, alpha: &[f64]) -> bool {
    let residual = norm_inf(&crate::numerics::sub(&p.matrix.matvec(alpha), &p.rhs));
    residual <= 1e-8 * (1.0 + norm_inf(&p.rhs))
        && alpha
            .iter()
            .enumerate()
            .all(|(j, &a)| !p.sign_constrained(j) || a >= -1e-10)
}

/// Dual variables for the optimality system of the feasibility program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub y: Vec<f64>,
    /// Slack `s_j = -(x̃^j)ᵀ y` for each sign-constrained coefficient.
    pub s: Vec<f64>,
    pub violated: Option<String>,
}

/// Builds `(y, s)` for the optimality system of a feasible result and
/// checks every row of it against `primal`.
///
/// The program has a zero objective, so `y = 0` attains the dual optimum
/// `f̃ᵀy = 0`; the rows then reduce to primal feasibility and sign checks.
pub fn lp_dual_certificate(p: &LpFeasibilityProblem, primal: &OptResult) -> DualCertificate {
    const ROW_TOL: f64 = 1e-7;
    let y = vec![0.0; p.matrix.rows()];
    let s: Vec<f64> = (0..p.matrix.cols())
        .map(|j| -dot(&p.matrix.column(j), &y))
        .collect();
    let mut violated = None;

    if primal.status != OptStatus::Feasible {
        violated = Some("primal result is not feasible".to_string());
    } else if primal.alpha.len() != p.matrix.cols() {
        violated = Some("coefficient vector has the wrong length".to_string());
    } else {
        let image = p.matrix.matvec(&primal.alpha);
        if let Some(r) = (0..image.len()).find(|&r| (image[r] - p.rhs[r]).abs() > ROW_TOL * (1.0 + p.rhs[r].abs())) {
            violated = Some(format!("equality row {r}: residual {:e}", image[r] - p.rhs[r]));
        }
        if violated.is_none() {
            for j in 0..p.matrix.cols() {
                let col = p.matrix.column(j);
                let row = dot(&col, &y) + if p.sign_constrained(j) { s[j] } else { 0.0 };
                if row.abs() > ROW_TOL {
                    violated = Some(format!("dual row {j}: residual {row:e}"));
                    break;
                }
                if p.sign_constrained(j) && (primal.alpha[j] < -ROW_TOL || s[j] < -ROW_TOL) {
                    violated = Some(format!("sign row {j}: alpha {:e}, s {:e}", primal.alpha[j], s[j]));
                    break;
                }
                if p.sign_constrained(j) && (primal.alpha[j] * s[j]).abs() > ROW_TOL {
                    violated = Some(format!("complementarity row {j}"));
                    break;
                }
            }
        }
        let gap = dot(&p.rhs, &y);
        if violated.is_none() && gap.abs() > ROW_TOL {
            violated = Some(format!("duality gap {gap:e}"));
        }
    }
    DualCertificate { y, s, violated }
}

pub fn lp_dual_check(p: &LpFeasibilityProblem, primal: &OptResult) -> bool {
    lp_dual_certificate(p, primal).violated.is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn triangle() -> Matrix {
        Matrix::from_columns(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn triangle_origin_feasible_direction() {
        let p = LpFeasibilityProblem::for_vertex(&triangle(), &[0.5, 0.5], 0).unwrap();
        let r = lp_feasible(&p).unwrap();
        assert_eq!(r.status, OptStatus::Feasible);
        assert_abs_diff_eq!(r.alpha[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.alpha[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.alpha[2], 0.5, epsilon = 1e-12);
        assert!(lp_dual_check(&p, &r));
    }

    #[test]
    fn triangle_origin_outward_direction() {
        let p = LpFeasibilityProblem::for_vertex(&triangle(), &[-1.0, 0.0], 0).unwrap();
        assert_eq!(lp_feasible(&p).unwrap().status, OptStatus::Infeasible);
    }

    #[test]
    fn zero_field_is_feasible_with_zero_coefficients() {
        let x = Matrix::from_columns(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.5], [2.0, 2.0]]).unwrap();
        for i in 0..4 {
            let p = LpFeasibilityProblem::for_vertex(&x, &[0.0, 0.0], i).unwrap();
            let r = lp_feasible(&p).unwrap();
            assert_eq!(r.status, OptStatus::Feasible);
            assert!(r.alpha.iter().all(|a| a.abs() < 1e-12));
            let cert = lp_dual_certificate(&p, &r);
            assert!(cert.violated.is_none());
            assert!(cert.y.iter().chain(&cert.s).all(|v| *v == 0.0));
        }
    }

    #[test]
    fn wide_system_uses_simplex() {
        // Square with 4 vertices in the plane: 3 rows, 4 columns.
        let x = Matrix::from_columns(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let p = LpFeasibilityProblem::for_vertex(&x, &[-1.0, -0.5], 2).unwrap();
        let r = lp_feasible(&p).unwrap();
        assert_eq!(r.status, OptStatus::Feasible);
        assert!(lp_dual_check(&p, &r));
        let p = LpFeasibilityProblem::for_vertex(&x, &[0.5, -1.0], 2).unwrap();
        assert_eq!(lp_feasible(&p).unwrap().status, OptStatus::Infeasible);
    }

    #[test]
    fn corrupted_primal_fails_dual_check() {
        let p = LpFeasibilityProblem::for_vertex(&triangle(), &[0.5, 0.5], 0).unwrap();
        let mut r = lp_feasible(&p).unwrap();
        r.alpha[1] = -r.alpha[1];
        let cert = lp_dual_certificate(&p, &r);
        assert!(cert.violated.is_some());
    }

    #[test]
    fn ray_with_free_coefficient() {
        let rays = Matrix::identity(2);
        // f(e1) = e2 for A = [[0,1],[1,0]]
        let p = LpFeasibilityProblem::for_ray(&rays, &[0.0, 1.0], 0).unwrap();
        let r = lp_feasible(&p).unwrap();
        assert_eq!(r.status, OptStatus::Feasible);
        assert_abs_diff_eq!(r.alpha[1], 1.0, epsilon = 1e-12);
        let p = LpFeasibilityProblem::for_ray(&rays, &[0.0, -1.0], 0).unwrap();
        assert_eq!(lp_feasible(&p).unwrap().status, OptStatus::Infeasible);
    }

    #[test]
    fn identical_inputs_identical_results() {
        let x = Matrix::from_columns(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 1.5]]).unwrap();
        let p = LpFeasibilityProblem::for_vertex(&x, &[-0.3, 0.7], 0).unwrap();
        let a = lp_feasible(&p).unwrap();
        let b = lp_feasible(&p).unwrap();
        assert_eq!(a, b);
    }
}
