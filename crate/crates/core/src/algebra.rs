//! Combination, marginalization, vacuous extension and elimination for
//! precise PMFs and for interval credal sets.

use rayon::prelude::*;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::interval::IntervalValuation;
use crate::optim::{CombinationSolver, SolverConfig};
use crate::pmf::PmfValuation;

/// Which algebra a network runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Precise,
    Credal,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineKind::Precise => "precise",
            EngineKind::Credal => "credal",
        })
    }
}

/// A piece of knowledge on a domain, in one of the two algebras.
#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    Pmf(PmfValuation),
    Interval(IntervalValuation),
}

impl Valuation {
    pub fn label(&self) -> &Domain {
        match self {
            Valuation::Pmf(p) => p.domain(),
            Valuation::Interval(k) => k.domain(),
        }
    }

    pub fn kind(&self) -> EngineKind {
        match self {
            Valuation::Pmf(_) => EngineKind::Precise,
            Valuation::Interval(_) => EngineKind::Credal,
        }
    }

    /// Neutral element on `domain` in the given algebra.
    pub fn identity(domain: Domain, kind: EngineKind) -> Self {
        match kind {
            EngineKind::Precise => Valuation::Pmf(PmfValuation::uniform(domain)),
            EngineKind::Credal => Valuation::Interval(IntervalValuation::identity(domain)),
        }
    }

    pub fn as_pmf(&self) -> Option<&PmfValuation> {
        match self {
            Valuation::Pmf(p) => Some(p),
            Valuation::Interval(_) => None,
        }
    }

    pub fn as_interval(&self) -> Option<&IntervalValuation> {
        match self {
            Valuation::Interval(k) => Some(k),
            Valuation::Pmf(_) => None,
        }
    }

    /// Lower and upper bounds per configuration; equal for PMFs.
    pub fn bounds(&self) -> (&[f64], &[f64]) {
        match self {
            Valuation::Pmf(p) => (p.probs(), p.probs()),
            Valuation::Interval(k) => (k.lower(), k.upper()),
        }
    }

    pub fn marginalize(&self, target: &Domain) -> Result<Valuation> {
        Ok(match self {
            Valuation::Pmf(p) => Valuation::Pmf(marginalize_pmf(p, target)?),
            Valuation::Interval(k) => Valuation::Interval(marginalize_credal(k, target)?),
        })
    }

    pub fn extend(&self, target: &Domain) -> Result<Valuation> {
        Ok(match self {
            Valuation::Pmf(p) => Valuation::Pmf(extend_pmf(p, target)?),
            Valuation::Interval(k) => Valuation::Interval(extend_credal(k, target)?),
        })
    }
}

/// Removes variable `name` by marginalization; a no-op when it is absent.
pub fn eliminate(v: &Valuation, name: &str) -> Result<Valuation> {
    if !v.label().contains(name) {
        return Ok(v.clone());
    }
    v.marginalize(&v.label().without(name))
}

/// Extends both operands to the union of their labels and combines them.
pub fn combine(v1: &Valuation, v2: &Valuation, cfg: &SolverConfig) -> Result<Valuation> {
    let joint = v1.label().union(v2.label())?;
    match (v1, v2) {
        (Valuation::Pmf(a), Valuation::Pmf(b)) => {
            let a = extend_pmf(a, &joint)?;
            let b = extend_pmf(b, &joint)?;
            Ok(Valuation::Pmf(combine_pmf(&a, &b)?))
        }
        (Valuation::Interval(a), Valuation::Interval(b)) => {
            let a = extend_credal(a, &joint)?;
            let b = extend_credal(b, &joint)?;
            Ok(Valuation::Interval(combine_credal(&a, &b, cfg)?))
        }
        _ => Err(Error::KindMismatch(format!(
            "cannot combine a {} valuation on {} with a {} valuation on {}",
            v1.kind(),
            v1.label(),
            v2.kind(),
            v2.label()
        ))),
    }
}

fn require_same_domain(a: &Domain, b: &Domain) -> Result<()> {
    if a != b {
        return Err(Error::Domain(format!(
            "operands live on {a} and {b}; extend them to a common domain first"
        )));
    }
    Ok(())
}

/// Pointwise product, renormalized.
pub fn combine_pmf(p1: &PmfValuation, p2: &PmfValuation) -> Result<PmfValuation> {
    require_same_domain(p1.domain(), p2.domain())?;
    let prod: Vec<f64> = p1.probs().iter().zip(p2.probs()).map(|(a, b)| a * b).collect();
    let total: f64 = prod.iter().sum();
    if !(total > 0.0) {
        return Err(Error::TotalConflict(format!(
            "the two PMFs on {} have disjoint support",
            p1.domain()
        )));
    }
    let probs = prod.into_iter().map(|x| x / total).collect();
    Ok(PmfValuation::from_parts_unchecked(p1.domain().clone(), probs))
}

pub fn marginalize_pmf(p: &PmfValuation, target: &Domain) -> Result<PmfValuation> {
    if target == p.domain() {
        return Ok(p.clone());
    }
    let proj = p.domain().projection(target)?;
    let mut probs = vec![0.0; target.cardinality()];
    for (y, &x) in proj.iter().enumerate() {
        probs[x] += p.probs()[y];
    }
    Ok(PmfValuation::from_parts_unchecked(target.clone(), probs))
}

/// Spreads each configuration's mass uniformly over its extensions.
pub fn extend_pmf(p: &PmfValuation, target: &Domain) -> Result<PmfValuation> {
    if target == p.domain() {
        return Ok(p.clone());
    }
    let proj = target.projection(p.domain())?;
    let factor = p.domain().cardinality() as f64 / target.cardinality() as f64;
    let probs = proj.iter().map(|&x| p.probs()[x] * factor).collect();
    Ok(PmfValuation::from_parts_unchecked(target.clone(), probs))
}

/// `K1 ⊗ K2` on a shared domain: the interval hull of all normalized
/// products `p1 ⊙ p2` of non-conflicting members.
pub fn combine_credal(k1: &IntervalValuation, k2: &IntervalValuation, cfg: &SolverConfig) -> Result<IntervalValuation> {
    require_same_domain(k1.domain(), k2.domain())?;
    if k1.is_vacuous() || k2.is_vacuous() {
        return Ok(IntervalValuation::vacuous(k1.domain().clone()));
    }
    if k1.is_identity() {
        return Ok(k2.clone());
    }
    if k2.is_identity() {
        return Ok(k1.clone());
    }
    if let (Some(p1), Some(p2)) = (k1.to_pmf(), k2.to_pmf()) {
        return Ok(IntervalValuation::from_pmf(&combine_pmf(&p1, &p2)?));
    }
    combine_credal_solver(k1, k2, cfg)
}

/// `K ⊗ vacuous`: the vacuous set is absorbing.
pub fn combine_credal_vacuous(k: &IntervalValuation) -> IntervalValuation {
    IntervalValuation::vacuous(k.domain().clone())
}

/// Combination through the optimizer, without any algebraic shortcut.
pub fn combine_credal_solver(k1: &IntervalValuation, k2: &IntervalValuation, cfg: &SolverConfig) -> Result<IntervalValuation> {
    require_same_domain(k1.domain(), k2.domain())?;
    let solver = CombinationSolver::new(k1, k2, cfg)?;
    let n = k1.len();
    let bounds: Vec<f64> = (0..2 * n)
        .into_par_iter()
        .map(|j| if j < n { solver.lower(j) } else { solver.upper(j - n) })
        .collect::<Result<_>>()?;
    let (lower, upper) = bounds.split_at(n);
    let lower: Vec<f64> = lower.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let upper: Vec<f64> = upper
        .iter()
        .zip(&lower)
        .map(|(u, l)| u.clamp(0.0, 1.0).max(*l))
        .collect();
    IntervalValuation::new(k1.domain().clone(), lower, upper)
}

pub fn marginalize_credal(k: &IntervalValuation, target: &Domain) -> Result<IntervalValuation> {
    if target == k.domain() {
        return Ok(k.clone());
    }
    let proj = k.domain().projection(target)?;
    let m = target.cardinality();
    let mut sum_lo = vec![0.0; m];
    let mut sum_up = vec![0.0; m];
    for (y, &x) in proj.iter().enumerate() {
        sum_lo[x] += k.lower()[y];
        sum_up[x] += k.upper()[y];
    }
    let total_lo: f64 = k.lower().iter().sum();
    let total_up: f64 = k.upper().iter().sum();
    let lower = (0..m)
        .map(|x| sum_lo[x].max(1.0 - (total_up - sum_up[x])))
        .collect();
    let upper = (0..m)
        .map(|x| sum_up[x].min(1.0 - (total_lo - sum_lo[x])))
        .collect();
    IntervalValuation::new(target.clone(), lower, upper)
}

pub fn extend_credal(k: &IntervalValuation, target: &Domain) -> Result<IntervalValuation> {
    if target == k.domain() {
        return Ok(k.clone());
    }
    let proj = target.projection(k.domain())?;
    let factor = k.domain().cardinality() as f64 / target.cardinality() as f64;
    let lower = proj.iter().map(|&x| k.lower()[x] * factor).collect();
    let upper = proj.iter().map(|&x| k.upper()[x] * factor).collect();
    IntervalValuation::new(target.clone(), lower, upper)
}
