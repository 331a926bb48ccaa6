//! Fixed-step integration and empirical falsification.
//!
//! Linear systems are advanced by the RK4 step matrix
//! `I + hA + (hA)²/2 + (hA)³/6 + (hA)⁴/24`, which is the classic RK4 update
//! written out once. `integrate_exact` uses the matrix exponential instead.

mod falsify;

pub use falsify::{falsify, falsify_from, Exit, FalsifyOptions};

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkers::DynamicalSystem;
use crate::numerics::{axpy, norm_inf, solve_linear, Matrix, NumericsError};
use crate::sets::SetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub step: f64,
    /// Set when the run was cut short by a non-finite or huge state; the
    /// offending state is not stored.
    pub diverged: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(f64::NAN)
    }

    /// One row per step: `t,x1,...,xn`, with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=n).map(|k| format!("x{k}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let row: Vec<String> = std::iter::once(t.to_string()).chain(x.iter().map(f64::to_string)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Number of steps of size `step` covering `horizon`.
pub(crate) fn step_count(horizon: f64, step: f64) -> Result<usize, DynamicsError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(DynamicsError::InvalidGrid(format!("step must be positive, got {step}")));
    }
    if !(horizon >= step && horizon.is_finite()) {
        return Err(DynamicsError::InvalidGrid(format!(
            "horizon {horizon} must be finite and at least one step ({step})"
        )));
    }
    Ok((horizon / step + 1e-9).floor() as usize)
}

/// Advances one state by one step.
pub(crate) enum Stepper<'a> {
    Matrix(Matrix),
    Field(&'a DynamicalSystem),
}

impl<'a> Stepper<'a> {
    pub(crate) fn rk4(sys: &'a DynamicalSystem, h: f64) -> Self {
        match sys {
            DynamicalSystem::Linear(a) => Stepper::Matrix(rk4_step_matrix(a, h)),
            DynamicalSystem::General { .. } => Stepper::Field(sys),
        }
    }

    pub(crate) fn is_autonomous(&self) -> bool {
        matches!(self, Stepper::Matrix(_))
    }

    pub(crate) fn advance(&self, t: f64, x: &[f64], h: f64) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.advance_into(t, x, h, &mut out);
        out
    }

    pub(crate) fn advance_into(&self, t: f64, x: &[f64], h: f64, out: &mut [f64]) {
        match self {
            Stepper::Matrix(p) => p.matvec_into(x, out),
            Stepper::Field(sys) => out.copy_from_slice(&rk4_step(sys, t, x, h)),
        }
    }
}

fn rk4_step(sys: &DynamicalSystem, t: f64, x: &[f64], h: f64) -> Vec<f64> {
    let k1 = sys.eval(t, x);
    let mut y = x.to_vec();
    axpy(0.5 * h, &k1, &mut y);
    let k2 = sys.eval(t + 0.5 * h, &y);
    y.copy_from_slice(x);
    axpy(0.5 * h, &k2, &mut y);
    let k3 = sys.eval(t + 0.5 * h, &y);
    y.copy_from_slice(x);
    axpy(h, &k3, &mut y);
    let k4 = sys.eval(t + h, &y);
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// RK4 applied to `ẋ = Ax` collapses to multiplication by this matrix.
pub fn rk4_step_matrix(a: &Matrix, h: f64) -> Matrix {
    let n = a.rows();
    let ha = a.scale(h);
    let mut term = Matrix::identity(n);
    let mut p = Matrix::identity(n);
    for k in 1..=4 {
        term = term.matmul(&ha).scale(1.0 / k as f64);
        p = p.add(&term);
    }
    p
}

fn run(stepper: &Stepper<'_>, x0: &[f64], t0: f64, steps: usize, h: f64, limit: f64) -> Trajectory {
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(t0);
    states.push(x0.to_vec());
    let mut diverged = false;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let next = stepper.advance(t, states.last().expect("nonempty"), h);
        if next.iter().any(|v| !v.is_finite()) || norm_inf(&next) > limit {
            diverged = true;
            break;
        }
        times.push(t0 + (k + 1) as f64 * h);
        states.push(next);
    }
    Trajectory {
        times,
        states,
        step: h,
        diverged,
    }
}

fn check_start(dim: usize, x0: &[f64]) -> Result<(), DynamicsError> {
    if x0.len() != dim {
        return Err(DynamicsError::Dimension(format!("system in R^{dim}, start in R^{}", x0.len())));
    }
    if let Some(index) = x0.iter().position(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite { index }.into());
    }
    Ok(())
}

/// Classic fixed-step RK4 from `t0` over `horizon`.
pub fn integrate(
    sys: &DynamicalSystem,
    x0: &[f64],
    t0: f64,
    horizon: f64,
    step: f64,
) -> Result<Trajectory, DynamicsError> {
    check_start(sys.dim(), x0)?;
    let steps = step_count(horizon, step)?;
    let limit = crate::config::Tolerances::DEFAULT.divergence;
    Ok(run(&Stepper::rk4(sys, step), x0, t0, steps, step, limit))
}

/// Samples `x(t) = e^{A(t-t0)} x0` on the same grid as [`integrate`].
pub fn integrate_exact(a: &Matrix, x0: &[f64], t0: f64, horizon: f64, step: f64) -> Result<Trajectory, DynamicsError> {
    check_start(a.rows(), x0)?;
    let steps = step_count(horizon, step)?;
    let e = expm(&a.scale(step))?;
    let limit = crate::config::Tolerances::DEFAULT.divergence;
    Ok(run(&Stepper::Matrix(e), x0, t0, steps, step, limit))
}

/// Padé(6,6) numerator coefficients.
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Matrix exponential by scaling and squaring with a degree-6 Padé
/// approximant.
pub fn expm(a: &Matrix) -> Result<Matrix, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::DimensionMismatch(format!("expm of {}x{}", a.rows(), a.cols())));
    }
    if let Some(index) = a.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite { index });
    }
    let n = a.rows();
    let norm = a.norm_inf();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = a.scale(0.5f64.powi(s));

    let mut num = Matrix::identity(n);
    let mut den = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for (k, &c) in PADE6.iter().enumerate().skip(1) {
        power = power.matmul(&x);
        num = num.add(&power.scale(c));
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        den = den.add(&power.scale(sign * c));
    }
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        cols.push(solve_linear(&den, &num.column(j))?);
    }
    let mut e = Matrix::from_columns(&cols)?;
    for _ in 0..s {
        e = e.matmul(&e);
    }
    Ok(e)
}
