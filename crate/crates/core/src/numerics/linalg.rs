use super::matrix::{dot, Matrix};
use super::NumericsError;
use crate::config::Tolerances;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "solve_linear: {}x{} system with rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let tol = Tolerances::DEFAULT.pivot;
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, m[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot < tol {
            return Err(NumericsError::SingularMatrix { step: k, pivot });
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            rhs.swap(k, p);
        }
        for i in (k + 1)..n {
            let factor = m[(i, k)] / m[(k, k)];
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= factor * m[(k, j)];
            }
            rhs[i] -= factor * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[(i, i)];
    }
    Ok(x)
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = q`.
///
/// Fails with `NotPositiveDefinite` when a pivot drops below the
/// positive-definiteness threshold.
pub fn cholesky(q: &Matrix) -> Result<Matrix, NumericsError> {
    let n = q.rows();
    if !q.is_square() {
        return Err(NumericsError::DimensionMismatch(format!(
            "cholesky of {}x{} matrix",
            q.rows(),
            q.cols()
        )));
    }
    let tol = Tolerances::DEFAULT.positive_definite;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = q[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < tol {
            return Err(NumericsError::NotPositiveDefinite(d));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = q[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `l y = b` for lower-triangular `l`.
pub fn forward_substitute(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - s) / l[(i, i)];
    }
    y
}

/// Solves `lᵀ x = y` for lower-triangular `l`.
pub fn back_substitute_transpose(l: &Matrix, y: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    x
}

/// Least-squares solution of `a x ≈ b` via Householder QR.
///
/// Requires full column rank; returns `SingularMatrix` when a diagonal of
/// `R` is negligible relative to the largest column norm.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(NumericsError::DimensionMismatch(format!(
            "least_squares: {m} rows, rhs of length {}",
            b.len()
        )));
    }
    if n > m {
        return Err(NumericsError::SingularMatrix { step: m, pivot: 0.0 });
    }
    let scale = (0..n)
        .map(|j| a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale {
            return Err(NumericsError::SingularMatrix { step: k, pivot: norm });
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 > 0.0 {
            for j in k..n {
                let s = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
                for i in k..m {
                    r[(i, j)] -= s * v[i - k];
                }
            }
            let s = (k..m).map(|i| v[i - k] * rhs[i]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                rhs[i] -= s * v[i - k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| r[(i, j)] * x[j]).sum();
        x[i] = (rhs[i] - s) / r[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
use super::matrix::norm_inf;

#[cfg(test)]
fn residual_inf(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    norm_inf(&super::matrix::sub(&ax, b))
}
