//! Small modeling layer over the standard-form simplex: free and boxed
//! variables, equality and `≤` rows, minimize or maximize.

use serde::{Deserialize, Serialize};

use super::simplex::{solve_standard, SimplexOutcome};
use super::SolverError;
use crate::config::Tolerances;
use crate::numerics::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    NonNegative,
    Free,
    Range(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Phase-I residual; zero up to the feasibility threshold when feasible.
    pub infeasibility: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    bounds: Vec<Bound>,
    eq: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
    objective: Option<Vec<f64>>,
    maximize: bool,
    feasibility_tol: f64,
}

enum Column {
    Plain(usize),
    Split(usize, usize),
    Shifted(usize, f64),
}

impl LinearProgram {
    /// `n` variables, all nonnegative until told otherwise.
    pub fn new(n: usize) -> Self {
        Self {
            bounds: vec![Bound::NonNegative; n],
            eq: Vec::new(),
            le: Vec::new(),
            objective: None,
            maximize: false,
            feasibility_tol: Tolerances::DEFAULT.lp_feasibility,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn set_bound(&mut self, j: usize, bound: Bound) -> &mut Self {
        self.bounds[j] = bound;
        self
    }

    pub fn free(&mut self, j: usize) -> &mut Self {
        self.set_bound(j, Bound::Free)
    }

    pub fn eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        debug_assert_eq!(row.len(), self.num_vars());
        self.eq.push((row, rhs));
        self
    }

    pub fn le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        debug_assert_eq!(row.len(), self.num_vars());
        self.le.push((row, rhs));
        self
    }

    pub fn minimize(&mut self, c: Vec<f64>) -> &mut Self {
        self.objective = Some(c);
        self.maximize = false;
        self
    }

    pub fn maximize(&mut self, c: Vec<f64>) -> &mut Self {
        self.objective = Some(c);
        self.maximize = true;
        self
    }

    pub fn feasibility_tolerance(&mut self, tol: f64) -> &mut Self {
        self.feasibility_tol = tol;
        self
    }

    pub fn solve(&self) -> Result<LpSolution, SolverError> {
        let n = self.num_vars();
        let mut columns = Vec::with_capacity(n);
        let mut width = 0;
        let mut box_rows: Vec<(usize, f64)> = Vec::new();
        for bound in &self.bounds {
            match *bound {
                Bound::NonNegative => {
                    columns.push(Column::Plain(width));
                    width += 1;
                }
                Bound::Free => {
                    columns.push(Column::Split(width, width + 1));
                    width += 2;
                }
                Bound::Range(lo, hi) => {
                    if hi < lo {
                        return Err(SolverError::Dimension(format!("empty range [{lo}, {hi}]")));
                    }
                    columns.push(Column::Shifted(width, lo));
                    box_rows.push((width, hi - lo));
                    width += 1;
                }
            }
        }
        let n_le = self.le.len() + box_rows.len();
        let slack0 = width;
        width += n_le;
        let m = self.eq.len() + n_le;

        let mut a = Matrix::zeros(m, width);
        let mut b = vec![0.0; m];
        let place = |a: &mut Matrix, r: usize, coeffs: &[f64]| -> f64 {
            let mut shift = 0.0;
            for (col, &v) in columns.iter().zip(coeffs) {
                match *col {
                    Column::Plain(k) => a[(r, k)] += v,
                    Column::Split(p, q) => {
                        a[(r, p)] += v;
                        a[(r, q)] -= v;
                    }
                    Column::Shifted(k, lo) => {
                        a[(r, k)] += v;
                        shift += v * lo;
                    }
                }
            }
            shift
        };
        let mut r = 0;
        for (row, rhs) in &self.eq {
            let shift = place(&mut a, r, row);
            b[r] = rhs - shift;
            r += 1;
        }
        for (k, (row, rhs)) in self.le.iter().enumerate() {
            let shift = place(&mut a, r, row);
            a[(r, slack0 + k)] = 1.0;
            b[r] = rhs - shift;
            r += 1;
        }
        for (k, &(col, width_k)) in box_rows.iter().enumerate() {
            a[(r, col)] = 1.0;
            a[(r, slack0 + self.le.len() + k)] = 1.0;
            b[r] = width_k;
            r += 1;
        }

        let cost = self.objective.as_ref().map(|c| {
            let sign = if self.maximize { -1.0 } else { 1.0 };
            let mut full = vec![0.0; width];
            for (col, &v) in columns.iter().zip(c) {
                match *col {
                    Column::Plain(k) | Column::Shifted(k, _) => full[k] = sign * v,
                    Column::Split(p, q) => {
                        full[p] = sign * v;
                        full[q] = -sign * v;
                    }
                }
            }
            full
        });

        let recover = |z: &[f64]| -> Vec<f64> {
            columns
                .iter()
                .map(|col| match *col {
                    Column::Plain(k) => z[k],
                    Column::Split(p, q) => z[p] - z[q],
                    Column::Shifted(k, lo) => z[k] + lo,
                })
                .collect()
        };

        let outcome = solve_standard(&a, &b, cost.as_deref(), self.feasibility_tol)?;
        Ok(match outcome {
            SimplexOutcome::Optimal { z, .. } => {
                let x = recover(&z);
                let objective = self
                    .objective
                    .as_ref()
                    .map_or(0.0, |c| c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum());
                LpSolution {
                    status: LpStatus::Optimal,
                    x,
                    objective,
                    infeasibility: 0.0,
                }
            }
            SimplexOutcome::Infeasible { residual, z } => LpSolution {
                status: LpStatus::Infeasible,
                x: recover(&z),
                objective: f64::NAN,
                infeasibility: residual,
            },
            SimplexOutcome::Unbounded => LpSolution {
                status: LpStatus::Unbounded,
                x: vec![f64::NAN; n],
                objective: if self.maximize { f64::INFINITY } else { f64::NEG_INFINITY },
                infeasibility: 0.0,
            },
        })
    }
}
