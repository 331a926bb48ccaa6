use serde::{Deserialize, Serialize};

use super::linalg::{back_substitute_transpose, cholesky, forward_substitute};
use super::matrix::Matrix;
use super::NumericsError;
use crate::config::Tolerances;

/// Symmetric eigendecomposition `M = V diag(values) Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, aligned with `values`.
    pub vectors: Matrix,
}

impl EigenResult {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Counts of (positive, zero, negative) eigenvalues with a symmetric
    /// zero band of half-width `band`.
    pub fn inertia(&self, band: f64) -> (usize, usize, usize) {
        self.values.iter().fold((0, 0, 0), |(p, z, n), &v| {
            if v > band {
                (p + 1, z, n)
            } else if v < -band {
                (p, z, n + 1)
            } else {
                (p, z + 1, n)
            }
        })
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn sym_eig(m: &Matrix) -> Result<EigenResult, NumericsError> {
    let tol = Tolerances::DEFAULT;
    if !m.is_square() {
        return Err(NumericsError::DimensionMismatch(format!(
            "sym_eig of {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let asym = m.asymmetry();
    if asym > 1e-9 * (1.0 + m.norm_inf()) {
        return Err(NumericsError::NotSymmetric(asym));
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(n);
    let threshold = tol.jacobi_rel * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..tol.jacobi_sweeps {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = c * arp - s * arq;
                        a[(p, r)] = a[(r, p)];
                        a[(r, q)] = s * arp + c * arq;
                        a[(q, r)] = a[(r, q)];
                    }
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(NumericsError::NoConvergence(tol.jacobi_sweeps));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, k)] = v[(r, i)];
        }
    }
    Ok(EigenResult { values, vectors })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(m: &Matrix) -> Result<f64, NumericsError> {
    Ok(sym_eig(m)?.max())
}

/// Largest generalized eigenpair of the pencil `M v = λ Q v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenEigPair {
    pub value: f64,
    /// Eigenvector normalized so that `vᵀ Q v = 1`.
    pub vector: Vec<f64>,
}

/// Largest `λ` with `M v = λ Q v` for symmetric `M` and positive definite
/// `Q`, by reduction to the standard problem `L⁻¹ M L⁻ᵀ` with `L Lᵀ = Q`.
pub fn gen_eig_max(m: &Matrix, q: &Matrix) -> Result<f64, NumericsError> {
    Ok(gen_eig_max_pair(m, q)?.value)
}

pub fn gen_eig_max_pair(m: &Matrix, q: &Matrix) -> Result<GenEigPair, NumericsError> {
    if !m.is_square() || !q.is_square() || m.rows() != q.rows() {
        return Err(NumericsError::DimensionMismatch(format!(
            "pencil of {}x{} and {}x{}",
            m.rows(),
            m.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let spectrum = sym_eig(q)?;
    if spectrum.min() <= Tolerances::DEFAULT.positive_definite {
        return Err(NumericsError::NotPositiveDefinite(spectrum.min()));
    }
    let l = cholesky(&q.symmetrized())?;
    let n = m.rows();
    let ms = m.symmetrized();
    // W = L⁻¹ M, then C = L⁻¹ Wᵀ = L⁻¹ M L⁻ᵀ.
    let mut w = Matrix::zeros(n, n);
    for j in 0..n {
        let col = forward_substitute(&l, &ms.column(j));
        for i in 0..n {
            w[(i, j)] = col[i];
        }
    }
    let wt = w.transpose();
    let mut c = Matrix::zeros(n, n);
    for j in 0..n {
        let col = forward_substitute(&l, &wt.column(j));
        for i in 0..n {
            c[(i, j)] = col[i];
        }
    }
    let eig = sym_eig(&c.symmetrized())?;
    let top = eig.vector(0);
    let vector = back_substitute_transpose(&l, &top);
    Ok(GenEigPair {
        value: eig.max(),
        vector,
    })
}
