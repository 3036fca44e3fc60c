//! Accuracy of an interval marginal against a ground-truth PMF.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::IntervalValuation;
use crate::pmf::PmfValuation;

/// Widths below this are clamped before taking logarithms.
pub const WIDTH_FLOOR: f64 = 1e-12;

/// Slack used when deciding whether a truth value lies inside an interval.
pub const CONTAINMENT_TOL: f64 = 1e-9;

fn require_same(truth: &PmfValuation, interval: &IntervalValuation) -> Result<()> {
    if truth.domain() != interval.domain() {
        return Err(Error::Domain(format!(
            "truth lives on {} but the intervals on {}",
            truth.domain(),
            interval.domain()
        )));
    }
    Ok(())
}

/// Per-state flag: does the interval contain the true probability?
pub fn containment(truth: &PmfValuation, interval: &IntervalValuation) -> Result<Vec<bool>> {
    require_same(truth, interval)?;
    Ok(containment_raw(truth.probs(), interval.lower(), interval.upper()))
}

pub fn containment_raw(truth: &[f64], lower: &[f64], upper: &[f64]) -> Vec<bool> {
    truth
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(p, (l, u))| *p >= l - CONTAINMENT_TOL && *p <= u + CONTAINMENT_TOL)
        .collect()
}

/// Distance between a true PMF and interval bounds, in `[0, 1]`.
///
/// `D = 1 / (1 + exp(-mean_i log(w_i / c_i)))` where `w_i` is the interval
/// width and `c_i ∈ {0, 1}` says whether the interval contains `p_i`. Any
/// miss drives the mean to `+∞` and `D` to 1. With all states contained this
/// is `g / (1 + g)` for the geometric mean width `g`.
pub fn distance_d(truth: &PmfValuation, interval: &IntervalValuation) -> Result<f64> {
    require_same(truth, interval)?;
    distance_d_raw(truth.probs(), interval.lower(), interval.upper())
}

pub fn distance_d_raw(truth: &[f64], lower: &[f64], upper: &[f64]) -> Result<f64> {
    let n = truth.len();
    if n == 0 || lower.len() != n || upper.len() != n {
        return Err(Error::Domain(format!(
            "truth has {n} states, bounds have {} and {}",
            lower.len(),
            upper.len()
        )));
    }
    let inside = containment_raw(truth, lower, upper);
    if inside.iter().any(|c| !c) {
        return Ok(1.0);
    }
    let mean_log = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| (u - l).max(WIDTH_FLOOR).ln())
        .sum::<f64>()
        / n as f64;
    Ok(1.0 / (1.0 + (-mean_log).exp()))
}

/// One method's marginal for a single target variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub method: String,
    pub variable: String,
    pub states: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains_truth: Option<Vec<bool>>,
}

impl MarginalReport {
    /// Report for `interval`, scored against `truth` when one is given.
    pub fn new(method: impl Into<String>, interval: &IntervalValuation, truth: Option<&PmfValuation>) -> Result<Self> {
        let d = interval.domain();
        if d.len() != 1 {
            return Err(Error::Domain(format!("reports cover one variable, got {d}")));
        }
        let var = &d.variables()[0];
        let (distance, contains_truth) = match truth {
            Some(t) => (Some(distance_d(t, interval)?), Some(containment(t, interval)?)),
            None => (None, None),
        };
        Ok(Self {
            method: method.into(),
            variable: var.name().to_string(),
            states: var.states().to_vec(),
            lower: interval.lower().to_vec(),
            upper: interval.upper().to_vec(),
            truth: truth.map(|t| t.probs().to_vec()),
            distance,
            contains_truth,
        })
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }
}

/// Side-by-side view of several methods' marginals for the same variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub variable: String,
    pub states: Vec<String>,
    pub reports: Vec<MarginalReport>,
}

pub fn compare(reports: Vec<MarginalReport>) -> Result<ComparisonTable> {
    let Some(first) = reports.first() else {
        return Err(Error::Domain("nothing to compare".into()));
    };
    let (variable, states) = (first.variable.clone(), first.states.clone());
    for r in &reports[1..] {
        if r.variable != variable || r.states != states {
            return Err(Error::Domain(format!(
                "report `{}` is on {}{:?}, expected {}{:?}",
                r.method, r.variable, r.states, variable, states
            )));
        }
    }
    Ok(ComparisonTable {
        variable,
        states,
        reports,
    })
}

impl ComparisonTable {
    /// Plain-text table, one row per state and one column per method.
    pub fn render(&self) -> String {
        let cell = |r: &MarginalReport, i: usize| {
            if r.is_point() {
                format!("{:.3}", r.lower[i])
            } else {
                format!("[{:.3}, {:.3}]", r.lower[i], r.upper[i])
            }
        };
        let mut widths: Vec<usize> = self
            .reports
            .iter()
            .map(|r| (0..self.states.len()).map(|i| cell(r, i).len()).max().unwrap_or(0).max(r.method.len()))
            .collect();
        let head = self.variable.len().max(self.states.iter().map(String::len).max().unwrap_or(0));
        widths.iter_mut().for_each(|w| *w += 2);
        let mut out = format!("{:<head$}", self.variable);
        for (r, w) in self.reports.iter().zip(&widths) {
            out += &format!(" |{:>w$}", r.method);
        }
        out.push('\n');
        out += &"-".repeat(out.len() - 1);
        out.push('\n');
        for (i, s) in self.states.iter().enumerate() {
            out += &format!("{s:<head$}");
            for (r, w) in self.reports.iter().zip(&widths) {
                out += &format!(" |{:>w$}", cell(r, i));
            }
            out.push('\n');
        }
        let scored: Vec<&MarginalReport> = self.reports.iter().filter(|r| r.distance.is_some()).collect();
        if !scored.is_empty() {
            out.push('\n');
            for r in scored {
                let all_in = r.contains_truth.as_ref().is_some_and(|c| c.iter().all(|b| *b));
                out += &format!(
                    "D({}) = {:.4}{}\n",
                    r.method,
                    r.distance.unwrap_or(f64::NAN),
                    if all_in { "" } else { "  (truth not contained)" }
                );
            }
        }
        out
    }
}
