use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bilinear::{
    alternating_lp_with, exchange_search, guided_starts, objective_weights, overlap, start_pairs, BilinearProblem, BilinearSolution, BoundKind,
};
use super::{SolverConfig, SolverKind};
use crate::error::{Error, Result};
use crate::interval::IntervalValuation;
use crate::vertex::vertices;

/// Result of a bisection on `ν ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome {
    /// Largest level known to satisfy `inner(ν) >= 0`.
    pub nu: f64,
    /// Smallest level known to violate it (1.0 when the whole range is feasible).
    pub high: f64,
    pub iterations: usize,
    /// `(ν_low, inner(ν_low), ν_high, inner(ν_high))` after every step.
    pub trace: Vec<(f64, f64, f64, f64)>,
}

/// Finds `max ν` with `inner(ν) >= 0` for a nonincreasing `inner` with `inner(0) >= 0`.
pub fn bisect<F>(mut inner: F, tol: f64, max_iter: usize) -> Result<BisectionOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g_high = inner(1.0)?;
    if g_high >= 0.0 {
        return Ok(BisectionOutcome {
            nu: 1.0,
            high: 1.0,
            iterations: 0,
            trace: Vec::new(),
        });
    }
    // inner(0) is a minimum of nonnegative products
    let mut g_low = inner(0.0)?.max(0.0);
    let (mut low, mut high, mut g_high) = (0.0f64, 1.0f64, g_high);
    let mut trace = Vec::new();
    let mut iterations = 0;
    while high - low > tol && iterations < max_iter {
        let mid = 0.5 * (low + high);
        let g = inner(mid)?;
        if g >= 0.0 {
            low = mid;
            g_low = g;
        } else {
            high = mid;
            g_high = g;
        }
        iterations += 1;
        debug_assert!(g_low >= 0.0 && g_high < 0.0, "bisection bracket lost at ν = {mid}");
        trace.push((low, g_low, high, g_high));
    }
    Ok(BisectionOutcome {
        nu: low,
        high,
        iterations,
        trace,
    })
}

/// Products `p1 ∘ p2` and overlaps for every non-conflicting vertex pair.
#[derive(Debug, Clone)]
struct PairTable {
    n: usize,
    products: Vec<f64>,
    overlaps: Vec<f64>,
}

impl PairTable {
    fn build(first: &IntervalValuation, second: &IntervalValuation, cfg: &SolverConfig) -> Result<Self> {
        let v1 = vertices(first, cfg.vertex_threshold)?;
        let v2 = vertices(second, cfg.vertex_threshold)?;
        let count = v1.len().saturating_mul(v2.len());
        if count > cfg.oracle_pair_limit {
            return Err(Error::ThresholdExceeded {
                what: "vertex pair count",
                size: count,
                limit: cfg.oracle_pair_limit,
            });
        }
        let n = first.len();
        let mut products = Vec::with_capacity(count * n);
        let mut overlaps = Vec::with_capacity(count);
        for a in &v1 {
            for b in &v2 {
                let s = overlap(a, b);
                if s >= cfg.eps_conflict {
                    products.extend(a.iter().zip(b).map(|(x, y)| x * y));
                    overlaps.push(s);
                }
            }
        }
        Ok(Self { n, products, overlaps })
    }

    fn inner_min(&self, index: usize, nu: f64, kind: BoundKind) -> f64 {
        self.overlaps
            .iter()
            .zip(self.products.chunks_exact(self.n))
            .map(|(&s, prod)| match kind {
                BoundKind::Lower => prod[index] - nu * s,
                BoundKind::Upper => (s - prod[index]) - nu * s,
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solves all bound problems for one pair of credal sets on a shared domain.
#[derive(Debug)]
pub struct CombinationSolver<'a> {
    first: &'a IntervalValuation,
    second: &'a IntervalValuation,
    cfg: SolverConfig,
    pairs: Option<PairTable>,
}

impl<'a> CombinationSolver<'a> {
    pub fn new(first: &'a IntervalValuation, second: &'a IntervalValuation, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if first.domain() != second.domain() {
            return Err(Error::Domain(format!(
                "cannot combine valuations on {} and {} without extension",
                first.domain(),
                second.domain()
            )));
        }
        let pairs = match cfg.solver {
            SolverKind::Oracle => Some(PairTable::build(first, second, cfg)?),
            SolverKind::Auto => PairTable::build(first, second, cfg).ok(),
            SolverKind::Lp => None,
        };
        let solver = Self {
            first,
            second,
            cfg: cfg.clone(),
            pairs,
        };
        if solver.max_overlap()? < cfg.eps_conflict {
            return Err(Error::TotalConflict(format!(
                "no pair of PMFs on {} has a positive product",
                first.domain()
            )));
        }
        Ok(solver)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Whether the exhaustive vertex-pair route is active.
    pub fn uses_oracle(&self) -> bool {
        self.pairs.is_some()
    }

    fn max_overlap(&self) -> Result<f64> {
        if let Some(t) = &self.pairs {
            return Ok(t.overlaps.iter().copied().fold(0.0, f64::max));
        }
        let problem = BilinearProblem::new(vec![-1.0; self.first.len()], self.first, self.second, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.rng_seed);
        let mut best = 0.0f64;
        for (a, b) in start_pairs(self.first, self.second, self.cfg.multistart_count, &mut rng) {
            let s = alternating_lp_with(&problem, (&a, &b), self.cfg.lp_backend)?;
            best = best.max(-s.value);
        }
        Ok(best)
    }

    fn problem_seed(&self, index: usize, kind: BoundKind) -> u64 {
        let tag = match kind {
            BoundKind::Lower => 0x5851_F42D_4C95_7F2D,
            BoundKind::Upper => 0x1405_7B7E_F767_814F,
        };
        self.cfg.rng_seed ^ tag ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    /// Runs the bisection for one bound and returns its outcome.
    pub fn solve(&self, index: usize, kind: BoundKind) -> Result<BisectionOutcome> {
        let n = self.first.len();
        if index >= n {
            return Err(Error::Domain(format!("configuration {index} out of range (n = {n})")));
        }
        let multistart = self.cfg.solver != SolverKind::Oracle;
        let starts = if multistart {
            let mut rng = ChaCha8Rng::seed_from_u64(self.problem_seed(index, kind));
            let mut s = guided_starts(self.first, self.second, index, kind);
            s.extend(start_pairs(self.first, self.second, self.cfg.multistart_count, &mut rng));
            s
        } else {
            Vec::new()
        };
        let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;
        let inner = |nu: f64| -> Result<f64> {
            let mut value = f64::INFINITY;
            if multistart {
                let problem = BilinearProblem::new(
                    objective_weights(n, index, nu, kind),
                    self.first,
                    self.second,
                    self.cfg.eps_conflict,
                );
                let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
                for (a, b) in warm.iter().chain(starts.iter()) {
                    let s = alternating_lp_with(&problem, (a, b), self.cfg.lp_backend)?;
                    // pairs in total conflict are excluded from the feasible set
                    let v = if overlap(&s.first, &s.second) < self.cfg.eps_conflict {
                        0.0
                    } else {
                        s.value
                    };
                    if best.as_ref().is_none_or(|b| v < b.0) {
                        best = Some((v, s.first, s.second));
                    }
                }
                if let Some((v, a, b)) = best {
                    let mut sol = BilinearSolution {
                        value: v,
                        first: a,
                        second: b,
                    };
                    // only a nonnegative value leaves the bisection step undecided
                    if sol.value >= 0.0 {
                        sol = exchange_search(&problem, sol, self.cfg.lp_backend, 0.0)?;
                    }
                    value = sol.value;
                    warm = Some((sol.first, sol.second));
                }
            }
            if let Some(t) = &self.pairs {
                value = value.min(t.inner_min(index, nu, kind));
            }
            Ok(value)
        };
        bisect(inner, self.cfg.bisection_tol, self.cfg.bisection_max_iter)
    }

    pub fn lower(&self, index: usize) -> Result<f64> {
        Ok(self.solve(index, BoundKind::Lower)?.nu)
    }

    pub fn upper(&self, index: usize) -> Result<f64> {
        Ok(1.0 - self.solve(index, BoundKind::Upper)?.nu)
    }
}

/// Lower probability of configuration `index` in `k1 ⊗ k2`.
pub fn lower_combined(k1: &IntervalValuation, k2: &IntervalValuation, index: usize, cfg: &SolverConfig) -> Result<f64> {
    CombinationSolver::new(k1, k2, cfg)?.lower(index)
}

/// Upper probability of configuration `index` in `k1 ⊗ k2`.
pub fn upper_combined(k1: &IntervalValuation, k2: &IntervalValuation, index: usize, cfg: &SolverConfig) -> Result<f64> {
    CombinationSolver::new(k1, k2, cfg)?.upper(index)
}
