//! Credal sets given by probability intervals on singleton configurations.

use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::pmf::PmfValuation;

/// Tolerance for nonemptiness and reachability checks.
pub const COHERENCE_TOL: f64 = 1e-9;

/// Intervals narrower than this are treated as points.
pub(crate) const PRECISE_TOL: f64 = 1e-12;

const NOISE_TOL: f64 = 1e-14;

/// `{p : lower <= p <= upper, sum p = 1}` over the configurations of a domain.
///
/// Values are always coherent: every constructor tightens the bounds so that
/// each one is attained by some member of the set.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalValuation {
    domain: Domain,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Outcome of [`check_coherence`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    /// `lower <= upper` everywhere.
    pub ordered_ok: bool,
    /// `sum lower <= 1 <= sum upper` (the set is nonempty).
    pub cond1_ok: bool,
    /// every bound is attained by a member of the set.
    pub reachable_ok: bool,
    /// configurations at which ordering or reachability fails.
    pub violating_indices: Vec<usize>,
}

impl CoherenceReport {
    pub fn is_coherent(&self) -> bool {
        self.ordered_ok && self.cond1_ok && self.reachable_ok
    }
}

/// Checks nonemptiness and reachability of raw interval vectors.
pub fn check_bounds(lower: &[f64], upper: &[f64]) -> CoherenceReport {
    let sum_lo: f64 = lower.iter().sum();
    let sum_up: f64 = upper.iter().sum();
    let cond1_ok = sum_lo <= 1.0 + COHERENCE_TOL && sum_up >= 1.0 - COHERENCE_TOL;
    let mut ordered_ok = true;
    let mut reachable_ok = true;
    let mut violating_indices = Vec::new();
    for (i, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        let ordered = l <= u + COHERENCE_TOL;
        let reach_up = sum_lo - l + u <= 1.0 + COHERENCE_TOL;
        let reach_lo = sum_up - u + l >= 1.0 - COHERENCE_TOL;
        ordered_ok &= ordered;
        reachable_ok &= reach_up && reach_lo;
        if !(ordered && reach_up && reach_lo) {
            violating_indices.push(i);
        }
    }
    CoherenceReport {
        ordered_ok,
        cond1_ok,
        reachable_ok,
        violating_indices,
    }
}

pub fn check_coherence(v: &IntervalValuation) -> CoherenceReport {
    check_bounds(&v.lower, &v.upper)
}

/// Narrows each bound to the value actually attainable inside the set.
///
/// The set of PMFs is unchanged; only unreachable parts of the intervals are cut.
pub fn tighten_bounds(lower: &[f64], upper: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let sum_lo: f64 = lower.iter().sum();
    let sum_up: f64 = upper.iter().sum();
    if sum_lo > 1.0 + COHERENCE_TOL || sum_up < 1.0 - COHERENCE_TOL {
        return Err(Error::EmptyCredalSet(format!(
            "sum of lower bounds {sum_lo}, sum of upper bounds {sum_up}"
        )));
    }
    let mut lo = Vec::with_capacity(lower.len());
    let mut up = Vec::with_capacity(upper.len());
    for (&l, &u) in lower.iter().zip(upper) {
        // cuts below float noise would only perturb bounds that are already reachable
        let cand_lo = 1.0 - (sum_up - u);
        let cand_up = 1.0 - (sum_lo - l);
        let l2 = if cand_lo > l + NOISE_TOL { cand_lo } else { l }.clamp(0.0, 1.0);
        let u2 = if cand_up < u - NOISE_TOL { cand_up } else { u }.clamp(0.0, 1.0);
        lo.push(l2);
        up.push(u2.max(l2));
    }
    Ok((lo, up))
}

impl IntervalValuation {
    /// Builds a coherent interval valuation, repairing float noise within
    /// [`COHERENCE_TOL`] and tightening to reachable bounds.
    pub fn new(domain: Domain, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = domain.cardinality();
        if lower.len() != n || upper.len() != n {
            return Err(Error::Incoherent(format!(
                "{domain} has {n} configurations, got {} lower and {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        let (lower, upper) = repair(lower, upper)?;
        let (lower, upper) = tighten_bounds(&lower, &upper)?;
        Ok(Self {
            domain,
            lower,
            upper,
        })
    }

    /// Like [`IntervalValuation::new`] but rejects intervals that are not
    /// already reachable instead of tightening them.
    pub fn new_strict(domain: Domain, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let report = check_bounds(&lower, &upper);
        if !report.cond1_ok {
            return Err(Error::EmptyCredalSet(format!(
                "sum of lower bounds {}, sum of upper bounds {}",
                lower.iter().sum::<f64>(),
                upper.iter().sum::<f64>()
            )));
        }
        if !report.is_coherent() {
            return Err(Error::Incoherent(format!(
                "reachability fails at configurations {:?}",
                report.violating_indices
            )));
        }
        Self::new(domain, lower, upper)
    }

    /// The set of all PMFs on the domain.
    pub fn vacuous(domain: Domain) -> Self {
        let n = domain.cardinality();
        let (lower, upper) = if n == 1 {
            (vec![1.0], vec![1.0])
        } else {
            (vec![0.0; n], vec![1.0; n])
        };
        Self {
            domain,
            lower,
            upper,
        }
    }

    /// The singleton set holding the uniform PMF.
    pub fn identity(domain: Domain) -> Self {
        Self::from_pmf(&PmfValuation::uniform(domain))
    }

    /// Zero-width intervals around a PMF.
    pub fn from_pmf(p: &PmfValuation) -> Self {
        Self {
            domain: p.domain().clone(),
            lower: p.probs().to_vec(),
            upper: p.probs().to_vec(),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn is_precise(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| u - l <= PRECISE_TOL)
    }

    pub fn is_vacuous(&self) -> bool {
        self.len() > 1 && self.lower.iter().all(|l| *l == 0.0) && self.upper.iter().all(|u| *u == 1.0)
    }

    pub fn is_identity(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(l, h)| (l - u).abs() <= PRECISE_TOL && (h - u).abs() <= PRECISE_TOL)
    }

    /// The PMF represented by a zero-width valuation.
    pub fn to_pmf(&self) -> Option<PmfValuation> {
        if !self.is_precise() {
            return None;
        }
        let mid: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        PmfValuation::from_weights(self.domain.clone(), mid).ok()
    }

    /// Whether `p` satisfies every bound (within `tol`).
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.len()
            && (p.iter().sum::<f64>() - 1.0).abs() <= tol
            && p
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *x >= l - tol && *x <= u + tol)
    }
}

fn repair(mut lower: Vec<f64>, mut upper: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    for (i, (l, u)) in lower.iter_mut().zip(upper.iter_mut()).enumerate() {
        if !l.is_finite() || !u.is_finite() {
            return Err(Error::Incoherent(format!("non-finite bound at configuration {i}")));
        }
        if *l < -COHERENCE_TOL || *u > 1.0 + COHERENCE_TOL || *u < -COHERENCE_TOL || *l > 1.0 + COHERENCE_TOL {
            return Err(Error::Incoherent(format!(
                "bounds [{l}, {u}] at configuration {i} are outside [0, 1]"
            )));
        }
        if *l > *u + COHERENCE_TOL {
            return Err(Error::Incoherent(format!(
                "lower bound {l} exceeds upper bound {u} at configuration {i}"
            )));
        }
        *l = l.clamp(0.0, 1.0);
        *u = u.clamp(0.0, 1.0).max(*l);
    }
    Ok((lower, upper))
}

/// Tightens raw intervals into a coherent valuation.
pub fn tighten_to_reachable(domain: Domain, lower: Vec<f64>, upper: Vec<f64>) -> Result<IntervalValuation> {
    IntervalValuation::new(domain, lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Variable;

    fn dom(n: usize) -> Domain {
        Domain::single(Variable::with_range("X", n).unwrap())
    }

    #[test]
    fn example_set_is_coherent() {
        let r = check_bounds(&[0.0, 0.0, 0.5], &[0.5, 0.5, 1.0]);
        assert!(r.is_coherent());
    }

    #[test]
    fn empty_set_fails_cond1() {
        let r = check_bounds(&[0.6, 0.5], &[0.7, 0.8]);
        assert!(!r.cond1_ok);
    }

    #[test]
    fn unreachable_uppers() {
        let r = check_bounds(&[0.2, 0.2], &[0.9, 0.9]);
        assert!(r.cond1_ok);
        assert!(!r.reachable_ok);
        assert_eq!(r.violating_indices, vec![0, 1]);
    }

    #[test]
    fn tighten_symmetric_binary() {
        let v = tighten_to_reachable(dom(2), vec![0.2, 0.2], vec![0.9, 0.9]).unwrap();
        for (a, b) in v.lower().iter().zip([0.2, 0.2]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in v.upper().iter().zip([0.8, 0.8]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(check_coherence(&v).is_coherent());
    }

    #[test]
    fn tighten_is_idempotent_on_reachable_input() {
        let v = tighten_to_reachable(dom(3), vec![0.0, 0.0, 0.5], vec![0.5, 0.5, 1.0]).unwrap();
        assert_eq!(v.lower(), &[0.0, 0.0, 0.5]);
        assert_eq!(v.upper(), &[0.5, 0.5, 1.0]);
    }

    #[test]
    fn tighten_keeps_precise() {
        let p = vec![0.25, 0.5, 0.25];
        let v = tighten_to_reachable(dom(3), p.clone(), p.clone()).unwrap();
        assert_eq!(v.lower(), &p[..]);
        assert_eq!(v.upper(), &p[..]);
    }

    #[test]
    fn tighten_rejects_empty_set() {
        let err = tighten_to_reachable(dom(2), vec![0.6, 0.5], vec![0.7, 0.8]).unwrap_err();
        assert!(matches!(err, Error::EmptyCredalSet(_)));
    }

    #[test]
    fn noise_is_clamped_and_large_errors_rejected() {
        let v = IntervalValuation::new(dom(2), vec![-1e-12, 0.5], vec![0.5, 1.0 + 1e-12]).unwrap();
        assert_eq!(v.lower()[0], 0.0);
        assert!(v.upper()[1] <= 1.0);
        assert!(IntervalValuation::new(dom(2), vec![-0.1, 0.5], vec![0.5, 1.0]).is_err());
        assert!(IntervalValuation::new(dom(2), vec![0.6, 0.0], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn strict_constructor_reports_reachability() {
        let err = IntervalValuation::new_strict(dom(2), vec![0.2, 0.2], vec![0.9, 0.9]).unwrap_err();
        assert!(matches!(err, Error::Incoherent(_)));
    }

    #[test]
    fn vacuous_and_identity() {
        let v = IntervalValuation::vacuous(dom(3));
        assert!(v.is_vacuous());
        assert!(check_coherence(&v).is_coherent());
        let e = IntervalValuation::identity(dom(4));
        assert!(e.is_identity() && e.is_precise());
    }
}
