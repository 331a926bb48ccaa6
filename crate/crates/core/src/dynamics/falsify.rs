use serde::{Deserialize, Serialize};

use super::{check_start, step_count, DynamicsError, Stepper};
use crate::checkers::DynamicalSystem;
use crate::config::Tolerances;
use crate::numerics::{axpy, dot, norm_inf, solve_linear, Matrix};
use crate::sets::{ConvexSet, Membership};
use crate::solvers::{LinearProgram, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FalsifyOptions {
    pub n_starts: usize,
    pub horizon: f64,
    pub step: f64,
    pub seed: u64,
    pub t0: f64,
    pub tolerances: Tolerances,
}

impl Default for FalsifyOptions {
    fn default() -> Self {
        Self {
            n_starts: 1000,
            horizon: 10.0,
            step: 1e-3,
            seed: 0,
            t0: 0.0,
            tolerances: Tolerances::DEFAULT,
        }
    }
}

/// First trajectory found leaving the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exit {
    pub start_index: usize,
    pub x0: Vec<f64>,
    pub t_exit: f64,
    pub x_exit: Vec<f64>,
    /// Normalized distance outside the set at `t_exit`.
    pub excess: f64,
}

/// Integrates from `n_starts` boundary samples nudged inward and reports
/// the lowest-index start whose trajectory leaves the set by more than the
/// exit band.
pub fn falsify(set: &ConvexSet, sys: &DynamicalSystem, opts: &FalsifyOptions) -> Result<Option<Exit>, DynamicsError> {
    check_start(sys.dim(), &vec![0.0; set.dim()])?;
    let tol = &opts.tolerances;
    let samples = set.sample_boundary(opts.n_starts, opts.seed)?;
    let starts: Vec<Vec<f64>> = samples
        .iter()
        .map(|bp| {
            let mut x = bp.point.clone();
            axpy(tol.inward_push, &set.inward_direction(bp), &mut x);
            x
        })
        .collect();
    search(set, sys, &starts, opts)
}

/// Like [`falsify`] but from given points: boundary points are nudged
/// inward, interior points are used as they are.
pub fn falsify_from(
    set: &ConvexSet,
    sys: &DynamicalSystem,
    points: &[Vec<f64>],
    opts: &FalsifyOptions,
) -> Result<Option<Exit>, DynamicsError> {
    let tol = &opts.tolerances;
    let mut starts = Vec::with_capacity(points.len());
    for (k, x) in points.iter().enumerate() {
        check_start(sys.dim(), x)?;
        match set.membership_with(x, tol.boundary)? {
            Membership::Inside => starts.push(x.clone()),
            Membership::Boundary => {
                let bp = set.boundary_point(x)?;
                let mut y = x.clone();
                axpy(tol.inward_push, &set.inward_direction(&bp), &mut y);
                starts.push(y);
            }
            Membership::Outside => {
                return Ok(Some(Exit {
                    start_index: k,
                    x0: x.clone(),
                    t_exit: opts.t0,
                    x_exit: x.clone(),
                    excess: set.excess(x)?,
                }))
            }
        }
    }
    search(set, sys, &starts, opts)
}

fn search(
    set: &ConvexSet,
    sys: &DynamicalSystem,
    starts: &[Vec<f64>],
    opts: &FalsifyOptions,
) -> Result<Option<Exit>, DynamicsError> {
    let steps = step_count(opts.horizon, opts.step)?;
    let h = opts.step;
    let tol = &opts.tolerances;
    let stepper = Stepper::rk4(sys, h);
    let mut monitor = Monitor::new(set);
    let mut next = vec![0.0; sys.dim()];
    for (index, x0) in starts.iter().enumerate() {
        let mut x = x0.clone();
        for k in 0..steps {
            let t = opts.t0 + k as f64 * h;
            stepper.advance_into(t, &x, h, &mut next);
            if next.iter().any(|v| !v.is_finite()) || norm_inf(&next) > tol.divergence {
                break;
            }
            if let Some(excess) = monitor.exceeds(&next, tol.exit_band)? {
                return Ok(Some(Exit {
                    start_index: index,
                    x0: x0.clone(),
                    t_exit: opts.t0 + (k + 1) as f64 * h,
                    x_exit: next,
                    excess,
                }));
            }
            if stepper.is_autonomous() && next == x {
                break;
            }
            std::mem::swap(&mut x, &mut next);
        }
    }
    Ok(None)
}

/// Exit test. V-forms keep a simplicial cell (n+1 vertices or n rays)
/// around the current point so most steps cost one small matrix product
/// instead of a nearest-point solve.
enum Monitor<'a> {
    Direct(&'a ConvexSet),
    Cells(CellMonitor<'a>),
}

impl<'a> Monitor<'a> {
    fn new(set: &'a ConvexSet) -> Self {
        match set {
            ConvexSet::Vpolytope(p) => Monitor::Cells(CellMonitor::new(set, p.vertices(), true)),
            ConvexSet::Vcone(c) => Monitor::Cells(CellMonitor::new(set, c.rays(), false)),
            _ => Monitor::Direct(set),
        }
    }

    fn exceeds(&mut self, x: &[f64], band: f64) -> Result<Option<f64>, DynamicsError> {
        match self {
            Monitor::Direct(set) => {
                let e = set.excess(x)?;
                Ok((e > band).then_some(e))
            }
            Monitor::Cells(c) => c.exceeds(x, band),
        }
    }
}

const CELL_SLACK: f64 = 1e-10;
const RETRY_AFTER: usize = 64;

struct CellMonitor<'a> {
    set: &'a ConvexSet,
    /// Generators, lifted by a trailing 1 for polytopes.
    columns: Vec<Vec<f64>>,
    lifted: bool,
    inverse: Option<Matrix>,
    cooldown: usize,
    lifted_point: Vec<f64>,
}

impl<'a> CellMonitor<'a> {
    fn new(set: &'a ConvexSet, generators: &[Vec<f64>], lifted: bool) -> Self {
        let columns = generators
            .iter()
            .map(|g| {
                let mut c = g.clone();
                if lifted {
                    c.push(1.0);
                }
                c
            })
            .collect();
        Self {
            set,
            columns,
            lifted,
            inverse: None,
            cooldown: 0,
            lifted_point: Vec::new(),
        }
    }

    fn lift(&mut self, x: &[f64]) {
        self.lifted_point.clear();
        self.lifted_point.extend_from_slice(x);
        if self.lifted {
            self.lifted_point.push(1.0);
        }
    }

    fn in_cell(&self, y: &[f64]) -> bool {
        let Some(inv) = &self.inverse else { return false };
        let slack = CELL_SLACK * (1.0 + norm_inf(y));
        (0..inv.rows()).all(|i| dot(inv.row(i), y) >= -slack)
    }

    fn exceeds(&mut self, x: &[f64], band: f64) -> Result<Option<f64>, DynamicsError> {
        self.lift(x);
        if self.in_cell(&self.lifted_point) {
            return Ok(None);
        }
        let y = self.lifted_point.clone();
        let e = self.set.excess(x)?;
        if e > band {
            return Ok(Some(e));
        }
        if self.cooldown > 0 {
            self.cooldown -= 1;
        } else {
            self.inverse = self.find_cell(&y);
            if self.inverse.is_none() {
                self.cooldown = RETRY_AFTER;
            }
        }
        Ok(None)
    }

    /// A basic feasible solution of `Cα = y, α ≥ 0` names at most `d`
    /// generators; they are completed to a basis of `R^d` and inverted.
    fn find_cell(&self, y: &[f64]) -> Option<Matrix> {
        let d = y.len();
        let l = self.columns.len();
        if l < d {
            return None;
        }
        let mut lp = LinearProgram::new(l);
        for (k, &yk) in y.iter().enumerate() {
            lp.eq(self.columns.iter().map(|c| c[k]).collect(), yk);
        }
        let sol = lp.solve().ok()?;
        if sol.status != LpStatus::Optimal {
            return None;
        }
        let mut order: Vec<usize> = (0..l).filter(|&j| sol.x[j] > 0.0).collect();
        order.extend((0..l).filter(|&j| sol.x[j] <= 0.0));

        let mut chosen: Vec<usize> = Vec::with_capacity(d);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
        for j in order {
            let c = &self.columns[j];
            let scale = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut r = c.clone();
            for q in &basis {
                let p: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
            }
            let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nr > 1e-9 * scale {
                r.iter_mut().for_each(|v| *v /= nr);
                basis.push(r);
                chosen.push(j);
                if chosen.len() == d {
                    break;
                }
            }
        }
        if chosen.len() < d {
            return None;
        }
        let cols: Vec<&Vec<f64>> = chosen.iter().map(|&j| &self.columns[j]).collect();
        let b = Matrix::from_columns(&cols).ok()?;
        let mut inv_cols = Vec::with_capacity(d);
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            inv_cols.push(solve_linear(&b, &e).ok()?);
        }
        Matrix::from_columns(&inv_cols).ok()
    }
}
