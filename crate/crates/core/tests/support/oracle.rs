//! Reference computations for the test suites. Everything here works on
//! plain nested vectors and shares no code with the library.

#![allow(dead_code)]

pub type Dense = Vec<Vec<f64>>;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// True when every off-diagonal entry is at least `-tol`.
pub fn is_metzler(a: &Dense, tol: f64) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| i == j || a[i][j] >= -tol))
}

/// Lower-triangular `L` with `L Lᵀ = q` (outer-product form).
fn cholesky(q: &Dense) -> Dense {
    let n = q.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = q[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        assert!(d > 0.0, "oracle cholesky: matrix not positive definite");
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            l[i][j] = (q[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    l
}

/// Solves `L y = b` for lower-triangular `L`.
fn forward(l: &Dense, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..l.len() {
        for k in 0..i {
            y[i] -= l[i][k] * y[k];
        }
        y[i] /= l[i][i];
    }
    y
}

/// Largest generalized eigenvalue of `M v = λ Q v` by shifted power
/// iteration on `L⁻¹ M L⁻ᵀ`, reported as a Rayleigh quotient.
pub fn power_gen_eig_max(m: &Dense, q: &Dense) -> f64 {
    let n = m.len();
    let l = cholesky(q);
    // C = L⁻¹ M L⁻ᵀ, built column by column from W = L⁻¹ M.
    let w: Dense = {
        let cols: Dense = (0..n).map(|j| forward(&l, &(0..n).map(|i| m[i][j]).collect::<Vec<_>>())).collect();
        (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
    };
    let c_rows: Dense = (0..n).map(|i| forward(&l, &w[i])).collect();
    let c: Dense = (0..n).map(|i| (0..n).map(|j| 0.5 * (c_rows[i][j] + c_rows[j][i])).collect()).collect();

    let shift: f64 = c.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64 + 1.0).sqrt()).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut rayleigh = f64::NAN;
    for it in 0..200_000 {
        let mut y: Vec<f64> = c.iter().map(|r| dot(r, &v)).collect();
        let r = dot(&v, &y);
        y.iter_mut().zip(&v).for_each(|(yi, vi)| *yi += shift * vi);
        let ny = dot(&y, &y).sqrt();
        y.iter_mut().for_each(|x| *x /= ny);
        let delta = (r - rayleigh).abs();
        rayleigh = r;
        v = y;
        if it > 50 && delta <= 1e-15 * (1.0 + r.abs()) {
            break;
        }
    }
    rayleigh
}

/// Residual norm and coefficients of the least-squares fit of `b` by the
/// given columns, or `None` when the columns are dependent.
fn least_squares(cols: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = cols.len();
    let mut q: Dense = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for (j, c) in cols.iter().enumerate() {
        let mut u = c.clone();
        for (i, qi) in q.iter().enumerate() {
            let p = dot(qi, &u);
            r[i][j] += p;
            u.iter_mut().zip(qi).for_each(|(a, b)| *a -= p * b);
        }
        // Second pass for orthogonality.
        for (i, qi) in q.iter().enumerate() {
            let p = dot(qi, &u);
            r[i][j] += p;
            u.iter_mut().zip(qi).for_each(|(a, b)| *a -= p * b);
        }
        let nu = dot(&u, &u).sqrt();
        if nu <= 1e-10 * (1.0 + dot(c, c).sqrt()) {
            return None;
        }
        r[j][j] = nu;
        q.push(u.into_iter().map(|v| v / nu).collect());
    }
    let qtb: Vec<f64> = q.iter().map(|qi| dot(qi, b)).collect();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r[i][j] * x[j]).sum();
        x[i] = (qtb[i] - s) / r[i][i];
    }
    let mut res = b.to_vec();
    for (j, c) in cols.iter().enumerate() {
        res.iter_mut().zip(c).for_each(|(a, v)| *a -= x[j] * v);
    }
    Some((x, dot(&res, &res).sqrt()))
}

/// `min ½‖Σ α_j v_j - f‖²` over `Σ α_j = 0`, `α_j ≥ 0` for `j ≠ free`,
/// by enumerating every support of the sign-constrained coefficients.
/// `vertices[j]` is `v_j`.
pub fn active_set_qp(vertices: &[Vec<f64>], f: &[f64], free: usize) -> f64 {
    let others: Vec<usize> = (0..vertices.len()).filter(|&j| j != free).collect();
    let edges: Dense = others
        .iter()
        .map(|&j| vertices[j].iter().zip(&vertices[free]).map(|(a, b)| a - b).collect())
        .collect();
    let mut best = 0.5 * dot(f, f);
    for mask in 1u32..(1 << others.len()) {
        let support: Vec<usize> = (0..others.len()).filter(|k| mask & (1 << k) != 0).collect();
        let cols: Dense = support.iter().map(|&k| edges[k].clone()).collect();
        if let Some((x, res)) = least_squares(&cols, f) {
            if x.iter().all(|&v| v >= -1e-12) {
                best = best.min(0.5 * res * res);
            }
        }
    }
    best
}

/// Coarse grid scan followed by repeated local refinement.
pub fn grid_minimize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = (lo, f(lo));
    for _ in 0..40 {
        let n = 200;
        let h = (b - a) / n as f64;
        for k in 0..=n {
            let x = a + k as f64 * h;
            let v = f(x);
            if v < best.1 {
                best = (x, v);
            }
        }
        a = (best.0 - 2.0 * h).max(lo);
        b = (best.0 + 2.0 * h).min(hi);
    }
    best
}
