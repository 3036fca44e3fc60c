//! Linear programs of the form `min c·x  s.t.  A x <= b, x >= 0`.
//!
//! [`DenseSimplex`] is a two-phase tableau simplex for general problems of
//! that form. [`LpBackend::Greedy`] solves the special case of a box
//! intersected with the probability simplex exactly by filling the cheapest
//! coordinates first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Constraint rows; each has `objective.len()` entries.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_constraint(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.objective.len(), "constraint width mismatch");
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// `min c·p` over `{lower <= p <= upper, sum p = 1}`, written with the
    /// `(2n+2) x n` constraint matrix: for each coordinate a `-p_i <= -lower_i`
    /// and `p_i <= upper_i` row, then `sum p <= 1` and `-sum p <= -1`.
    pub fn box_simplex(objective: &[f64], lower: &[f64], upper: &[f64]) -> Self {
        let n = objective.len();
        let mut lp = Self::new(objective.to_vec());
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = -1.0;
            lp.add_constraint(row.clone(), -lower[i]);
            row[i] = 1.0;
            lp.add_constraint(row, upper[i]);
        }
        lp.add_constraint(vec![1.0; n], 1.0);
        lp.add_constraint(vec![-1.0; n], -1.0);
        lp
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let neg = x.iter().fold(0.0f64, |m, v| m.max(-v));
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b)
            .fold(neg, f64::max)
    }
}

/// Solves `p` with the dense simplex method.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    DenseSimplex::default().solve(p)
}

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    pub max_iter: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self { max_iter: 50_000 }
    }
}

struct Tableau {
    // (m + 1) x (cols + 1); last row is the objective, last column the rhs
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the objective row; `allowed` masks entering columns.
    fn optimize(&mut self, allowed: &[bool], max_iter: usize) -> Result<()> {
        let m = self.basis.len();
        let mut degenerate_run = 0usize;
        for _ in 0..max_iter {
            let obj = &self.t[m];
            // Dantzig's rule, switching to Bland's rule on long degenerate runs
            let entering = if degenerate_run < 50 {
                (0..self.cols)
                    .filter(|&c| allowed[c] && obj[c] < -PIVOT_TOL)
                    .min_by(|&a, &b| obj[a].total_cmp(&obj[b]))
            } else {
                (0..self.cols).find(|&c| allowed[c] && obj[c] < -PIVOT_TOL)
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.t[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_TOL
                                || (ratio <= lratio + PIVOT_TOL && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leaving else {
                return Err(Error::Solver("linear program is unbounded".into()));
            };
            if ratio.abs() <= PIVOT_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::Solver("simplex iteration limit reached".into()))
    }
}

impl DenseSimplex {
    pub fn solve(&self, p: &LpProblem) -> Result<LpSolution> {
        let n = p.objective.len();
        let m = p.rows.len();
        let n_art = p.rhs.iter().filter(|b| **b < 0.0).count();
        let cols = n + m + n_art;
        let mut t = vec![vec![0.0; cols + 1]; m + 1];
        let mut basis = vec![0; m];
        let mut art = n + m;
        for (i, (row, &b)) in p.rows.iter().zip(&p.rhs).enumerate() {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            for (j, a) in row.iter().enumerate() {
                t[i][j] = sign * a;
            }
            t[i][n + i] = sign;
            t[i][cols] = sign * b;
            if b < 0.0 {
                t[i][art] = 1.0;
                basis[i] = art;
                art += 1;
            } else {
                basis[i] = n + i;
            }
        }
        let mut tab = Tableau { t, basis, cols };

        if n_art > 0 {
            // phase 1: minimize the sum of artificials, expressed in nonbasic terms
            for c in n + m..cols {
                tab.t[m][c] = 1.0;
            }
            for r in 0..m {
                if tab.basis[r] >= n + m {
                    for c in 0..=cols {
                        let v = tab.t[r][c];
                        tab.t[m][c] -= v;
                    }
                }
            }
            let allowed = vec![true; cols];
            tab.optimize(&allowed, self.max_iter)?;
            if -tab.t[m][cols] > FEAS_TOL {
                return Err(Error::Infeasible);
            }
            // drive remaining zero-level artificials out of the basis
            for r in 0..m {
                if tab.basis[r] >= n + m {
                    if let Some(c) = (0..n + m).find(|&c| tab.t[r][c].abs() > PIVOT_TOL) {
                        tab.pivot(r, c);
                    }
                }
            }
        }

        // phase 2
        for v in tab.t[m].iter_mut() {
            *v = 0.0;
        }
        for (j, c) in p.objective.iter().enumerate() {
            tab.t[m][j] = *c;
        }
        for r in 0..m {
            let bcol = tab.basis[r];
            let f = tab.t[m][bcol];
            if f != 0.0 {
                for c in 0..=cols {
                    let v = tab.t[r][c];
                    tab.t[m][c] -= f * v;
                }
            }
        }
        let allowed: Vec<bool> = (0..cols).map(|c| c < n + m).collect();
        tab.optimize(&allowed, self.max_iter)?;

        let mut x = vec![0.0; n];
        for r in 0..m {
            if tab.basis[r] < n {
                x[tab.basis[r]] = tab.rhs(r).max(0.0);
            }
        }
        let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, value })
    }
}

/// Which linear-programming routine solves the per-block subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpBackend {
    /// Exact closed-form solution for box ∩ simplex feasible sets.
    #[default]
    Greedy,
    /// General dense simplex on the explicit constraint matrix.
    Simplex,
}

impl LpBackend {
    /// `min c·p` over `{lower <= p <= upper, sum p = 1}`.
    pub fn minimize(self, c: &[f64], lower: &[f64], upper: &[f64]) -> Result<LpSolution> {
        match self {
            LpBackend::Greedy => minimize_box_simplex(c, lower, upper),
            LpBackend::Simplex => solve_lp(&LpProblem::box_simplex(c, lower, upper)),
        }
    }
}

/// Exact minimizer of a linear objective over a box intersected with the simplex.
pub fn minimize_box_simplex(c: &[f64], lower: &[f64], upper: &[f64]) -> Result<LpSolution> {
    let mut x = lower.to_vec();
    let mut remaining = 1.0 - lower.iter().sum::<f64>();
    if remaining < -FEAS_TOL || upper.iter().sum::<f64>() < 1.0 - FEAS_TOL {
        return Err(Error::Infeasible);
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
    for i in order {
        if remaining <= 0.0 {
            break;
        }
        let add = (upper[i] - lower[i]).min(remaining);
        x[i] += add;
        remaining -= add;
    }
    let value = c.iter().zip(&x).map(|(a, v)| a * v).sum();
    Ok(LpSolution { x, value })
}
