//! Dense two-phase tableau simplex for `min cᵀz s.t. A z = b, z ≥ 0`.
//!
//! Pivoting follows Bland's rule: the entering column is the lowest index
//! with a negative reduced cost and ratio-test ties go to the lowest basic
//! variable index. Identical inputs therefore produce identical pivots.

use super::SolverError;
use crate::numerics::Matrix;

const REDUCED_COST_EPS: f64 = 1e-11;
const PIVOT_EPS: f64 = 1e-10;
const DRIVE_OUT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexOutcome {
    Optimal { z: Vec<f64>, objective: f64 },
    /// Phase I stalled above the feasibility threshold; `residual` is the
    /// minimal L1 norm of `A z - b` over `z ≥ 0`.
    Infeasible { residual: f64, z: Vec<f64> },
    Unbounded,
}

struct Tableau {
    m: usize,
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), SolverError> {
        self.pivots += 1;
        if self.pivots > self.max_pivots {
            return Err(SolverError::NumericalFailure(format!(
                "simplex exceeded {} pivots",
                self.max_pivots
            )));
        }
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.cells[r * w + j] /= p;
        }
        self.cells[r * w + c] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = self.at(i, c);
            if factor == 0.0 {
                continue;
            }
            for j in 0..w {
                let v = self.cells[r * w + j];
                self.cells[i * w + j] -= factor * v;
            }
            self.cells[i * w + c] = 0.0;
        }
        let factor = self.cost[c];
        if factor != 0.0 {
            for j in 0..w {
                self.cost[j] -= factor * self.cells[r * w + j];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        Ok(())
    }

    /// Runs Bland pivots over columns `0..allowed`. Returns false when the
    /// problem is unbounded along the entering column.
    fn optimize(&mut self, allowed: usize) -> Result<bool, SolverError> {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -REDUCED_COST_EPS) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, enter);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let slack = 1e-12 * (1.0 + br.abs());
                        if ratio < br - slack || (ratio <= br + slack && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter)?,
                None => return Ok(false),
            }
        }
    }

    fn extract(&self, n: usize) -> Vec<f64> {
        let mut z = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                z[b] = self.rhs(i).max(0.0);
            }
        }
        z
    }
}

/// Solves the standard-form program. With `cost = None` only phase I runs
/// and a feasible point is reported with objective zero.
pub fn solve_standard(
    a: &Matrix,
    b: &[f64],
    cost: Option<&[f64]>,
    feasibility_tol: f64,
) -> Result<SimplexOutcome, SolverError> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m || cost.is_some_and(|c| c.len() != n) {
        return Err(SolverError::Dimension(format!(
            "simplex: A is {m}x{n}, b has {}, c has {:?}",
            b.len(),
            cost.map(<[f64]>::len)
        )));
    }
    let width = n + m + 1;
    let mut cells = vec![0.0; m * width];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            cells[i * width + j] = sign * a[(i, j)];
        }
        cells[i * width + n + i] = 1.0;
        cells[i * width + width - 1] = sign * b[i];
    }
    let mut cost_row = vec![0.0; width];
    for i in 0..m {
        for j in 0..n {
            cost_row[j] -= cells[i * width + j];
        }
        cost_row[width - 1] -= cells[i * width + width - 1];
    }
    let mut t = Tableau {
        m,
        width,
        cells,
        basis: (n..n + m).collect(),
        cost: cost_row,
        pivots: 0,
        max_pivots: 50 * (m + n) + 200,
    };

    // Phase I: minimize the sum of artificials. Cannot be unbounded.
    t.optimize(n + m)?;
    let residual = (0..m)
        .filter(|&i| t.basis[i] >= n)
        .map(|i| t.rhs(i).abs())
        .sum::<f64>();
    if residual > feasibility_tol {
        return Ok(SimplexOutcome::Infeasible {
            residual,
            z: t.extract(n),
        });
    }

    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant and are dropped.
    let mut i = 0;
    while i < t.m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t.at(i, j).abs() > DRIVE_OUT_EPS) {
                t.pivot(i, j)?;
            } else {
                let w = t.width;
                t.cells.drain(i * w..(i + 1) * w);
                t.basis.remove(i);
                t.m -= 1;
                continue;
            }
        }
        i += 1;
    }

    let Some(c) = cost else {
        return Ok(SimplexOutcome::Optimal {
            z: t.extract(n),
            objective: 0.0,
        });
    };

    // Phase II over the original columns only.
    let mut cost_row = vec![0.0; width];
    cost_row[..n].copy_from_slice(c);
    for r in 0..t.m {
        let cb = c[t.basis[r]];
        if cb == 0.0 {
            continue;
        }
        for j in 0..width {
            cost_row[j] -= cb * t.at(r, j);
        }
    }
    t.cost = cost_row;
    if !t.optimize(n)? {
        return Ok(SimplexOutcome::Unbounded);
    }
    let z = t.extract(n);
    let objective = c.iter().zip(&z).map(|(ci, zi)| ci * zi).sum();
    Ok(SimplexOutcome::Optimal { z, objective })
}
