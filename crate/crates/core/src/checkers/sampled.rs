use super::{CheckError, CheckOptions, DynamicalSystem, Verdict};
use crate::sets::ConvexSet;
use crate::tangent::{cone_contains, cone_violation, tangent_at};

/// Tests the tangent-cone condition at sampled boundary points. The first
/// failing sample (by index) is returned; a clean run is only `Unknown`.
pub fn check_nonlinear_sampled(
    set: &ConvexSet,
    sys: &DynamicalSystem,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    if set.dim() != sys.dim() {
        return Err(CheckError::Dimension(format!("system in R^{}, set in R^{}", sys.dim(), set.dim())));
    }
    let samples = set.sample_boundary(opts.n_samples, opts.seed)?;
    let count = samples.len();
    for bp in samples {
        let f = sys.eval(opts.t0, &bp.point);
        if let Some(index) = f.iter().position(|v| !v.is_finite()) {
            return Err(CheckError::Numerics(crate::numerics::NumericsError::NonFinite { index }));
        }
        let cone = tangent_at(set, &bp)?;
        if !cone_contains(&cone, &f, opts.tolerances.cone)? {
            let violation = cone_violation(&cone, &f)?;
            return Ok(Verdict::not_invariant(bp.point, violation));
        }
    }
    Ok(Verdict::unknown().with_warning(format!("tangent condition held on all {count} boundary samples")))
}
