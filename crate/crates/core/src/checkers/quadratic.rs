use super::{CheckError, CheckOptions, Certificate, Verdict};
use crate::config::Tolerances;
use crate::numerics::{gen_eig_max_pair, minimize_scalar_convex, sym_eig, Matrix};
use crate::sets::{ConvexSet, Ellipsoid, LorenzCone};

fn lyapunov_form(a: &Matrix, q: &Matrix) -> Result<Matrix, CheckError> {
    if a.rows() != q.rows() || a.cols() != q.cols() {
        return Err(CheckError::Dimension(format!(
            "A is {}x{}, Q is {}x{}",
            a.rows(),
            a.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let qa = q.matmul(a);
    Ok(qa.add(&qa.transpose()))
}

/// Top eigenpair of `M - ηQ`.
fn shifted_top(m: &Matrix, q: &Matrix, eta: f64) -> Result<(f64, Vec<f64>), CheckError> {
    let e = sym_eig(&m.sub_scaled(eta, q))?;
    Ok((e.max(), e.vector(0)))
}

fn fix_sign(mut x: Vec<f64>) -> Vec<f64> {
    let mut k = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[k].abs() + 1e-12 {
            k = i;
        }
    }
    if x[k] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    x
}

/// Invariant iff `λ* = λ_max(AᵀQ + QA, Q) ≤ 0`; otherwise the generalized
/// eigenvector, scaled to the boundary, violates `xᵀQAx ≤ 0` by `½λ*`.
pub fn check_ellipsoid_linear(e: &Ellipsoid, a: &Matrix, tol: &Tolerances) -> Result<Verdict, CheckError> {
    let q = e.q();
    let m = lyapunov_form(a, q)?;
    let pair = gen_eig_max_pair(&m, q)?;
    let eta = pair.value;
    if eta <= tol.eigen_sign {
        let (lambda_max, witness) = shifted_top(&m, q, eta)?;
        return Ok(Verdict::invariant(Certificate::Eigen {
            eta,
            lambda_max,
            witness,
        }));
    }
    let x = fix_sign(pair.vector);
    Ok(Verdict::not_invariant(x, 0.5 * eta))
}

/// Sufficient S-procedure certificate first, boundary sampling second.
pub fn check_lorenz_linear(c: &LorenzCone, a: &Matrix, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    let tol = &opts.tolerances;
    let q = c.q();
    let m = lyapunov_form(a, q)?;

    let q_eig = sym_eig(q)?;
    let min_abs = q_eig.values.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    let beta = 10.0 * (1.0 + m.gershgorin_radius()) / min_abs.max(1e-6);
    let mut failure = None;
    let best = minimize_scalar_convex(
        |eta| match sym_eig(&m.sub_scaled(eta, q)) {
            Ok(e) => e.max(),
            Err(err) => {
                failure.get_or_insert(err);
                f64::INFINITY
            }
        },
        (-beta, beta),
        1e-12 * beta.max(1.0),
    )?;
    if let Some(err) = failure {
        return Err(err.into());
    }
    if best.min <= tol.eigen_sign {
        let (lambda_max, witness) = shifted_top(&m, q, best.argmin)?;
        return Ok(Verdict::invariant(Certificate::Eigen {
            eta: best.argmin,
            lambda_max,
            witness,
        }));
    }

    let qa = q.matmul(a);
    let threshold = tol.eigen_sign * (1.0 + qa.norm_inf());
    let set = ConvexSet::Lorenz(c.clone());
    let mut worst: Option<(f64, Vec<f64>)> = None;
    for bp in set.sample_boundary(opts.n_samples, opts.seed)? {
        let v = qa.quadratic_form(&bp.point);
        if v > threshold && worst.as_ref().is_none_or(|(w, _)| v > *w) {
            worst = Some((v, bp.point));
        }
    }
    Ok(match worst {
        Some((v, x)) => Verdict::not_invariant(x, v),
        None => Verdict::unknown().with_warning(format!(
            "no multiplier certificate (min over eta of lambda_max = {:e}) and no violation on {} samples",
            best.min, opts.n_samples
        )),
    })
}
