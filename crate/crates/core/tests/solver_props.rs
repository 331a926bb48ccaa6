#[path = "support/oracle.rs"]
mod oracle;

use nagumo_core::solvers::{kkt_residuals, lp_feasible, qp_nearest, LpFeasibilityProblem, OptStatus, QpProblem};
use nagumo_core::Matrix;
use proptest::prelude::*;

/// Vertex problem: `l` points in `R^n`, a field, and the vertex index.
/// Half the fields are built from nonnegative edge combinations so both
/// outcomes occur.
fn vertex_problem(max_l: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, usize)> {
    (2usize..=5, 2usize..=max_l).prop_flat_map(|(n, l)| {
        (
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, n), l),
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(0.0..1.0f64, l),
            0..l,
            any::<bool>(),
        )
            .prop_map(|(pts, f, w, i, inside)| {
                let f = if inside {
                    let mut g = vec![0.0; pts[0].len()];
                    for (j, p) in pts.iter().enumerate().filter(|(j, _)| *j != i) {
                        for k in 0..g.len() {
                            g[k] += w[j] * (p[k] - pts[i][k]);
                        }
                    }
                    g
                } else {
                    f
                };
                (pts, f, i)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lp_and_qp_agree((pts, f, i) in vertex_problem(8)) {
        let x = Matrix::from_columns(&pts).unwrap();
        let lp = lp_feasible(&LpFeasibilityProblem::for_vertex(&x, &f, i).unwrap()).unwrap();
        let qp = qp_nearest(&QpProblem { x, f, free_index: i }).unwrap();
        prop_assert_eq!(lp.status == OptStatus::Feasible, qp.objective <= 1e-9, "lp {:?} qp {}", lp.status, qp.objective);
    }

    #[test]
    fn qp_matches_enumeration((pts, f, i) in vertex_problem(6)) {
        let x = Matrix::from_columns(&pts).unwrap();
        let p = QpProblem { x, f: f.clone(), free_index: i };
        let qp = qp_nearest(&p).unwrap();
        let brute = oracle::active_set_qp(&pts, &f, i);
        prop_assert!((qp.objective - brute).abs() <= 1e-8, "{} vs {}", qp.objective, brute);
        prop_assert!(kkt_residuals(&p, &qp).max() <= 1e-7);
    }

    #[test]
    fn simplex_is_deterministic((pts, f, i) in vertex_problem(8)) {
        let x = Matrix::from_columns(&pts).unwrap();
        let p = LpFeasibilityProblem::for_vertex(&x, &f, i).unwrap();
        let a = lp_feasible(&p).unwrap();
        let b = lp_feasible(&p.clone()).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert!(a.alpha.iter().zip(&b.alpha).all(|(u, v)| u.to_bits() == v.to_bits()));
        prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }
}
