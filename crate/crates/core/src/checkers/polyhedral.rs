use super::{
    check_nonlinear_sampled, CheckError, CheckOptions, Certificate, Coefficients, Decision, DynamicalSystem,
    FacetOptimum, Verdict,
};
use crate::config::Tolerances;
use crate::numerics::{dot, Matrix};
use crate::sets::{HPolyhedron, VCone, VPolytope};
use crate::solvers::{
    lp_dual_check, lp_feasible, qp_nearest, Bound, LinearProgram, LpFeasibilityProblem, LpStatus, OptStatus,
    QpProblem,
};
use crate::tangent::{cone_violation, tangent_vcone};

/// One LP per facet: `max g_iᵀAx` over the facet, boxed by `‖x‖_∞ ≤ R`.
pub fn check_hpoly_linear(p: &HPolyhedron, a: &Matrix, tol: &Tolerances) -> Result<Verdict, CheckError> {
    let n = p.dim();
    if a.rows() != n || a.cols() != n {
        return Err(CheckError::Dimension(format!("A is {}x{}, set lives in R^{n}", a.rows(), a.cols())));
    }
    let r = tol.facet_box;
    let g = p.g();
    let b = p.b();
    let mut facets = Vec::with_capacity(p.num_constraints());
    let mut warnings = Vec::new();
    for i in 0..p.num_constraints() {
        let mut lp = LinearProgram::new(n);
        for j in 0..n {
            lp.set_bound(j, Bound::Range(-r, r));
        }
        for k in 0..p.num_constraints() {
            if k == i {
                lp.eq(g.row(k).to_vec(), b[k]);
            } else {
                lp.le(g.row(k).to_vec(), b[k]);
            }
        }
        lp.maximize(a.tr_matvec(g.row(i)));
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => {
                let on_box = sol.x.iter().any(|v| v.abs() >= r * (1.0 - 1e-9));
                if sol.objective > tol.facet_optimum {
                    let violation = dot(g.row(i), &a.matvec(&sol.x));
                    let mut v = Verdict::not_invariant(sol.x, violation);
                    if on_box {
                        v = v.with_warning(format!("facet {i}: maximizer lies on the bounding box"));
                    }
                    return Ok(v);
                }
                if on_box {
                    warnings.push(format!("facet {i}: maximizer lies on the bounding box"));
                }
                facets.push(FacetOptimum {
                    facet: i,
                    optimum: Some(sol.objective),
                    maximizer: Some(sol.x),
                    on_box,
                });
            }
            LpStatus::Infeasible => {
                if p.is_empty()? {
                    return Err(CheckError::EmptySet);
                }
                // Redundant inequality whose hyperplane misses the set.
                facets.push(FacetOptimum {
                    facet: i,
                    optimum: None,
                    maximizer: None,
                    on_box: false,
                });
            }
            LpStatus::Unbounded => {
                return Err(CheckError::Solver(crate::solvers::SolverError::NumericalFailure(format!(
                    "facet {i}: boxed LP reported unbounded"
                ))))
            }
        }
    }
    let mut v = Verdict::invariant(Certificate::Facets { facets });
    v.warnings = warnings;
    Ok(v)
}

/// Nonnegative orthant: invariant iff `A` is Metzler. The first failing ray
/// `e^i` (lowest index) is reported with `(Ae^i)_j`.
pub fn check_orthant_linear(a: &Matrix, tol: &Tolerances) -> Result<Verdict, CheckError> {
    if !a.is_square() {
        return Err(CheckError::Dimension(format!("A is {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    let mut min_off = f64::INFINITY;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let v = a[(j, i)];
            if v < -tol.metzler {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                return Ok(Verdict::not_invariant(e, v));
            }
            min_off = min_off.min(v);
        }
    }
    if n == 1 {
        min_off = 0.0;
    }
    Ok(Verdict::invariant(Certificate::Metzler {
        min_off_diagonal: min_off,
    }))
}

/// Per-vertex coefficient feasibility. General systems additionally pass
/// through the sampled checker and are never reported invariant.
pub fn check_vpolytope(p: &VPolytope, sys: &DynamicalSystem, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    if sys.dim() != p.dim() {
        return Err(CheckError::Dimension(format!("system in R^{}, set in R^{}", sys.dim(), p.dim())));
    }
    let mut vertices = Vec::with_capacity(p.num_vertices());
    for i in 0..p.num_vertices() {
        let x = p.vertex(i);
        let f = sys.eval(opts.t0, x);
        let prob = LpFeasibilityProblem::for_vertex(p.matrix(), &f, i)?;
        let res = lp_feasible(&prob)?;
        if res.status == OptStatus::Infeasible {
            let qp = qp_nearest(&QpProblem {
                x: p.matrix().clone(),
                f,
                free_index: i,
            })?;
            return Ok(Verdict::not_invariant(x.to_vec(), (2.0 * qp.objective).max(0.0).sqrt()));
        }
        vertices.push(Coefficients {
            index: i,
            dual_verified: lp_dual_check(&prob, &res),
            alpha: res.alpha,
        });
    }
    finish(Certificate::Vertices { vertices }, &p.clone().into(), sys, opts, "vertex")
}

/// Per-ray feasibility with the ray's own coefficient free.
pub fn check_vcone(c: &VCone, sys: &DynamicalSystem, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    if sys.dim() != c.dim() {
        return Err(CheckError::Dimension(format!("system in R^{}, set in R^{}", sys.dim(), c.dim())));
    }
    let mut rays = Vec::with_capacity(c.num_rays());
    for i in 0..c.num_rays() {
        let x = c.ray(i);
        let f = sys.eval(opts.t0, x);
        let prob = LpFeasibilityProblem::for_ray(c.matrix(), &f, i)?;
        let res = lp_feasible(&prob)?;
        if res.status == OptStatus::Infeasible {
            let violation = cone_violation(&tangent_vcone(c, i)?, &f)?;
            return Ok(Verdict::not_invariant(x.to_vec(), violation));
        }
        rays.push(Coefficients {
            index: i,
            dual_verified: lp_dual_check(&prob, &res),
            alpha: res.alpha,
        });
    }
    finish(Certificate::Rays { rays }, &c.clone().into(), sys, opts, "ray")
}

fn finish(
    cert: Certificate,
    set: &crate::sets::ConvexSet,
    sys: &DynamicalSystem,
    opts: &CheckOptions,
    what: &str,
) -> Result<Verdict, CheckError> {
    if let DynamicalSystem::Linear(_) = sys {
        return Ok(Verdict::invariant(cert));
    }
    let sampled = check_nonlinear_sampled(set, sys, opts)?;
    if sampled.decision == Decision::NotInvariant {
        return Ok(sampled);
    }
    let mut v = Verdict::unknown().with_warning(format!(
        "every {what} condition holds, but conditions at extreme points alone do not cover a nonlinear field"
    ));
    v.certificate = Some(cert);
    v.warnings.extend(sampled.warnings);
    Ok(v)
}
