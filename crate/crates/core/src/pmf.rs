use crate::domain::Domain;
use crate::error::{Error, Result};

pub(crate) const SUM_TOL: f64 = 1e-12;

/// A precise probability mass function over the configurations of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfValuation {
    domain: Domain,
    probs: Vec<f64>,
}

impl PmfValuation {
    pub fn new(domain: Domain, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != domain.cardinality() {
            return Err(Error::InvalidPmf(format!(
                "{} has {} configurations but {} probabilities were given",
                domain,
                domain.cardinality(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidPmf(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL * probs.len().max(1) as f64 {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(Self { domain, probs })
    }

    /// Normalizes nonnegative weights into a PMF.
    pub fn from_weights(domain: Domain, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidPmf(format!("weights sum to {total}")));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Self::new(domain, probs)
    }

    pub fn uniform(domain: Domain) -> Self {
        let n = domain.cardinality();
        Self {
            domain,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub(crate) fn from_parts_unchecked(domain: Domain, probs: Vec<f64>) -> Self {
        debug_assert_eq!(domain.cardinality(), probs.len());
        Self { domain, probs }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().all(|p| *p == u)
    }
}
