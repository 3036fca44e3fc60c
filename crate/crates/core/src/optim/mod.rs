//! Bounds of the combined credal set.
//!
//! The lower bound of configuration `i` in `K1 ⊗ K2` is the largest `ν` for
//! which `min Σ (1{x=i} - ν) p1(x) p2(x) >= 0` over `p1 ∈ K1, p2 ∈ K2`; the
//! upper bound is `1 - ν*` for the complementary indicator. The outer search
//! is a bisection on `ν`; the inner minimum is a bilinear program solved by
//! multi-start alternating LP and, on small frames, by exhaustive vertex pairs.

pub mod bilinear;
pub mod bisection;
pub mod lp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vertex::DEFAULT_VERTEX_THRESHOLD;

pub use bilinear::{alternating_lp, vertex_pair_oracle, BilinearProblem, BilinearSolution, BoundKind};
pub use bisection::{bisect, lower_combined, upper_combined, BisectionOutcome, CombinationSolver};
pub use lp::{solve_lp, DenseSimplex, LpBackend, LpProblem, LpSolution};

/// How the inner bilinear minimum is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Multi-start alternating LP, plus the vertex-pair oracle when both sets are small.
    #[default]
    Auto,
    /// Multi-start alternating LP only.
    Lp,
    /// Exhaustive vertex pairs only; fails when the sets are too large.
    Oracle,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "lp" => Ok(Self::Lp),
            "oracle" => Ok(Self::Oracle),
            other => Err(Error::Solver(format!("unknown solver `{other}` (expected auto, lp or oracle)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub bisection_tol: f64,
    pub bisection_max_iter: usize,
    pub multistart_count: usize,
    pub rng_seed: u64,
    /// Largest frame whose vertices may be enumerated.
    pub vertex_threshold: usize,
    /// Largest number of vertex pairs the oracle will scan.
    pub oracle_pair_limit: usize,
    /// Pairs with `Σ p1 p2` below this are treated as totally conflicting.
    pub eps_conflict: f64,
    pub solver: SolverKind,
    pub lp_backend: LpBackend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            bisection_tol: 1e-6,
            bisection_max_iter: 60,
            multistart_count: 16,
            rng_seed: 0,
            vertex_threshold: DEFAULT_VERTEX_THRESHOLD,
            oracle_pair_limit: 250_000,
            eps_conflict: 1e-9,
            solver: SolverKind::Auto,
            lp_backend: LpBackend::Greedy,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let tol_ok = |t: f64| t > 0.0 && t < 1e-2;
        if !tol_ok(self.bisection_tol) || !tol_ok(self.eps_conflict) {
            return Err(Error::Solver("tolerances must lie in (0, 1e-2)".into()));
        }
        if self.bisection_max_iter == 0
            || self.multistart_count == 0
            || self.vertex_threshold == 0
            || self.oracle_pair_limit == 0
        {
            return Err(Error::Solver("iteration and size limits must be positive".into()));
        }
        Ok(())
    }
}
