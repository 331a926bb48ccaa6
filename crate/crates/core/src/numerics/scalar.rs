use serde::{Deserialize, Serialize};

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMinimum {
    pub argmin: f64,
    pub min: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimizer of a convex function on
/// `[lo, hi]`, stopping once the bracket is narrower than `tol`.
pub fn minimize_scalar_convex<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<ScalarMinimum, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(NumericsError::BadBracket(a, b));
    }
    let tol = tol.max(f64::EPSILON * (a.abs() + b.abs()));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    // Report the best evaluated point, including the bracket ends.
    let mid = 0.5 * (a + b);
    let candidates = [(c, fc), (d, fd), (mid, f(mid)), (a, f(a)), (b, f(b))];
    let (argmin, min) = candidates
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(ScalarMinimum { argmin, min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{lambda_max, Matrix};
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic() {
        let r = minimize_scalar_convex(|x| (x - 3.0) * (x - 3.0), (-10.0, 10.0), 1e-8).unwrap();
        assert_abs_diff_eq!(r.argmin, 3.0, epsilon = 1e-7);
    }

    #[test]
    fn kink_at_zero() {
        let r = minimize_scalar_convex(f64::abs, (-1.0, 2.0), 1e-10).unwrap();
        assert_abs_diff_eq!(r.argmin, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn max_eigenvalue_of_pencil() {
        // eigenvalues of diag(2,-2) - η diag(1,-1) are 2-η and η-2
        let m = Matrix::diag(&[2.0, -2.0]);
        let q = Matrix::diag(&[1.0, -1.0]);
        let r = minimize_scalar_convex(|eta| lambda_max(&m.sub_scaled(eta, &q)).unwrap(), (-20.0, 20.0), 1e-10)
            .unwrap();
        assert_abs_diff_eq!(r.argmin, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.min, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_bracket() {
        assert!(matches!(
            minimize_scalar_convex(|x| x, (1.0, 1.0), 1e-6),
            Err(NumericsError::BadBracket(..))
        ));
        assert!(minimize_scalar_convex(|x| x, (0.0, f64::INFINITY), 1e-6).is_err());
    }
}
