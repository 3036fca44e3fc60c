//! The inner problem `min p1ᵀ diag(c) p2` over a product of two credal sets.

use rand::seq::SliceRandom;
use rand::Rng;

use super::lp::{minimize_box_simplex, LpBackend};
use crate::error::{Error, Result};
use crate::interval::IntervalValuation;

const IMPROVEMENT_TOL: f64 = 1e-10;
const MAX_ROUNDS: usize = 100;
const EXCHANGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// `min Σ_x c(x) p1(x) p2(x)` with `p1 ∈ K1`, `p2 ∈ K2`.
#[derive(Debug, Clone)]
pub struct BilinearProblem<'a> {
    pub objective: Vec<f64>,
    pub first: &'a IntervalValuation,
    pub second: &'a IntervalValuation,
    pub eps_conflict: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSolution {
    pub value: f64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

/// Objective weights for the bound of configuration `index` at level `nu`.
///
/// Lower bound: `1 - ν` at `index`, `-ν` elsewhere. Upper bound: `-ν` at
/// `index`, `1 - ν` elsewhere.
pub fn objective_weights(n: usize, index: usize, nu: f64, kind: BoundKind) -> Vec<f64> {
    let (hit, miss) = match kind {
        BoundKind::Lower => (1.0 - nu, -nu),
        BoundKind::Upper => (-nu, 1.0 - nu),
    };
    (0..n).map(|x| if x == index { hit } else { miss }).collect()
}

impl<'a> BilinearProblem<'a> {
    pub fn new(objective: Vec<f64>, first: &'a IntervalValuation, second: &'a IntervalValuation, eps_conflict: f64) -> Self {
        Self {
            objective,
            first,
            second,
            eps_conflict,
        }
    }

    pub fn for_bound(
        first: &'a IntervalValuation,
        second: &'a IntervalValuation,
        index: usize,
        nu: f64,
        kind: BoundKind,
        eps_conflict: f64,
    ) -> Self {
        Self::new(objective_weights(first.len(), index, nu, kind), first, second, eps_conflict)
    }

    pub fn raw_value(&self, p1: &[f64], p2: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(p1.iter().zip(p2))
            .map(|(c, (a, b))| c * a * b)
            .sum()
    }

    /// Objective value, or `None` when the pair is in total conflict.
    pub fn value(&self, p1: &[f64], p2: &[f64]) -> Option<f64> {
        (overlap(p1, p2) >= self.eps_conflict).then(|| self.raw_value(p1, p2))
    }
}

/// `Σ_x p1(x) p2(x)`, the normalization constant of the product.
pub fn overlap(p1: &[f64], p2: &[f64]) -> f64 {
    p1.iter().zip(p2).map(|(a, b)| a * b).sum()
}

fn block_minimize(backend: LpBackend, weights: &[f64], fixed: &[f64], set: &IntervalValuation) -> Result<(Vec<f64>, f64)> {
    let c: Vec<f64> = weights.iter().zip(fixed).map(|(w, f)| w * f).collect();
    let s = backend.minimize(&c, set.lower(), set.upper())?;
    Ok((s.x, s.value))
}

/// Alternately solves the LP in one block with the other held fixed.
///
/// Stops when a full round improves the objective by less than `1e-10` or
/// after 100 rounds. The returned value never exceeds the start value.
pub fn alternating_lp(problem: &BilinearProblem<'_>, start: (&[f64], &[f64])) -> Result<BilinearSolution> {
    alternating_lp_with(problem, start, LpBackend::Greedy)
}

pub fn alternating_lp_with(
    problem: &BilinearProblem<'_>,
    start: (&[f64], &[f64]),
    backend: LpBackend,
) -> Result<BilinearSolution> {
    let mut best = BilinearSolution {
        value: problem.raw_value(start.0, start.1),
        first: start.0.to_vec(),
        second: start.1.to_vec(),
    };
    let single_first = problem.first.is_precise();
    let single_second = problem.second.is_precise();
    for _ in 0..MAX_ROUNDS {
        let (p2, _) = block_minimize(backend, &problem.objective, &best.first, problem.second)?;
        let (p1, value) = block_minimize(backend, &problem.objective, &p2, problem.first)?;
        let improvement = best.value - value;
        if improvement > 0.0 {
            best = BilinearSolution {
                value,
                first: p1,
                second: p2,
            };
        }
        if improvement < IMPROVEMENT_TOL || single_first || single_second {
            break;
        }
    }
    Ok(best)
}

/// Improves a local solution by mass exchanges between two coordinates of
/// one block, re-running the alternation after each move.
///
/// Accepts the first improving move and repeats until none improves or the
/// value drops below `stop_below`.
pub fn exchange_search(
    problem: &BilinearProblem<'_>,
    start: BilinearSolution,
    backend: LpBackend,
    stop_below: f64,
) -> Result<BilinearSolution> {
    let mut best = start;
    let mut improved = true;
    while improved && best.value >= stop_below {
        improved = false;
        for swap_second in [false, true] {
            let (x, set) = if swap_second {
                (&best.second, problem.second)
            } else {
                (&best.first, problem.first)
            };
            let (lo, up) = (set.lower(), set.upper());
            let n = x.len();
            let mut candidate = None;
            'moves: for a in (0..n).filter(|&a| x[a] > lo[a] + EXCHANGE_TOL) {
                for b in (0..n).filter(|&b| b != a && x[b] < up[b] - EXCHANGE_TOL) {
                    let t = (x[a] - lo[a]).min(up[b] - x[b]);
                    let mut moved = x.clone();
                    moved[a] -= t;
                    moved[b] += t;
                    let s = if swap_second {
                        let (p1, _) = block_minimize(backend, &problem.objective, &moved, problem.first)?;
                        alternating_lp_with(problem, (&p1, &moved), backend)?
                    } else {
                        let p2 = best.second.clone();
                        alternating_lp_with(problem, (&moved, &p2), backend)?
                    };
                    if s.value < best.value - IMPROVEMENT_TOL && overlap(&s.first, &s.second) >= problem.eps_conflict {
                        candidate = Some(s);
                        break 'moves;
                    }
                }
            }
            if let Some(s) = candidate {
                best = s;
                improved = true;
                break;
            }
        }
    }
    Ok(best)
}

/// Exact minimum over all vertex pairs with overlap at least `eps_conflict`.
pub fn vertex_pair_oracle(problem: &BilinearProblem<'_>, threshold: usize) -> Result<BilinearSolution> {
    let v1 = crate::vertex::vertices(problem.first, threshold)?;
    let v2 = crate::vertex::vertices(problem.second, threshold)?;
    let mut best: Option<BilinearSolution> = None;
    for a in &v1 {
        for b in &v2 {
            if let Some(value) = problem.value(a, b) {
                if best.as_ref().is_none_or(|s| value < s.value) {
                    best = Some(BilinearSolution {
                        value,
                        first: a.clone(),
                        second: b.clone(),
                    });
                }
            }
        }
    }
    best.ok_or_else(|| Error::TotalConflict("every vertex pair is in total conflict".into()))
}

/// Vertex reached by raising coordinates from their lower bounds in `priority` order.
pub(crate) fn fill_vertex(set: &IntervalValuation, priority: &[usize]) -> Vec<f64> {
    let mut rank = vec![0.0; set.len()];
    for (r, &i) in priority.iter().enumerate() {
        rank[i] = r as f64;
    }
    minimize_box_simplex(&rank, set.lower(), set.upper())
        .map(|s| s.x)
        .unwrap_or_else(|_| set.lower().to_vec())
}

/// Vertex reached by lowering coordinates from their upper bounds in index order.
pub(crate) fn drain_vertex(set: &IntervalValuation) -> Vec<f64> {
    let mut x = set.upper().to_vec();
    let mut excess = x.iter().sum::<f64>() - 1.0;
    for (xi, l) in x.iter_mut().zip(set.lower()) {
        if excess <= 0.0 {
            break;
        }
        let cut = (*xi - l).min(excess);
        *xi -= cut;
        excess -= cut;
    }
    x
}

/// Start pairs for multi-start: the lower-filled pair, the upper-drained
/// pair, then random vertex pairs.
pub(crate) fn start_pairs<R: Rng>(
    first: &IntervalValuation,
    second: &IntervalValuation,
    count: usize,
    rng: &mut R,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let ascending: Vec<usize> = (0..first.len()).collect();
    let mut starts = vec![(fill_vertex(first, &ascending), fill_vertex(second, &ascending))];
    if count > 1 {
        starts.push((drain_vertex(first), drain_vertex(second)));
    }
    let mut perm = ascending;
    while starts.len() < count {
        perm.shuffle(rng);
        let a = fill_vertex(first, &perm);
        perm.shuffle(rng);
        let b = fill_vertex(second, &perm);
        starts.push((a, b));
    }
    starts
}

/// Start pairs shaped by the bound being computed.
///
/// For a lower bound both PMFs push configuration `index` down and pile
/// their mass on a common configuration `j`; for an upper bound both push
/// `index` up and spread the rest apart. One pair per `j != index`.
pub(crate) fn guided_starts(
    first: &IntervalValuation,
    second: &IntervalValuation,
    index: usize,
    kind: BoundKind,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = first.len();
    let by_room = |set: &IntervalValuation| {
        let mut order: Vec<usize> = (0..n).filter(|&x| x != index).collect();
        order.sort_by(|&a, &b| set.upper()[b].total_cmp(&set.upper()[a]).then(a.cmp(&b)));
        order
    };
    let (rest1, rest2) = (by_room(first), by_room(second));
    let mut starts = Vec::with_capacity(n.saturating_sub(1));
    for j in (0..n).filter(|&x| x != index) {
        let lead = |rest: &[usize]| -> Vec<usize> {
            std::iter::once(j).chain(rest.iter().copied().filter(|&x| x != j)).collect()
        };
        let (p1, p2): (Vec<usize>, Vec<usize>) = match kind {
            BoundKind::Lower => (
                lead(&rest1).into_iter().chain(std::iter::once(index)).collect(),
                lead(&rest2).into_iter().chain(std::iter::once(index)).collect(),
            ),
            BoundKind::Upper => (
                std::iter::once(index).chain(lead(&rest1)).collect(),
                std::iter::once(index)
                    .chain(rest2.iter().copied().filter(|&x| x != j))
                    .chain(std::iter::once(j))
                    .collect(),
            ),
        };
        starts.push((fill_vertex(first, &p1), fill_vertex(second, &p2)));
    }
    starts
}
