//! Compiles knowledge statements such as `A = D + T` or `if S=1 then R=0`
//! into valuations on their joint domain.
//!
//! A rule holding with reliability `r` puts mass `r` uniformly on the
//! configurations that satisfy it and `1 - r` uniformly on the rest. With an
//! interval reliability `[l, u]` the satisfying configurations get
//! `[l/|S|, u/|S|]` and the violating ones `[(1-u)/|V|, (1-l)/|V|]`.

use serde::{Deserialize, Serialize};

use crate::algebra::{EngineKind, Valuation};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::interval::IntervalValuation;
use crate::pmf::PmfValuation;

/// How sure we are that a rule holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    pub lower: f64,
    pub upper: f64,
    /// Point value used by the precise engine when the interval is not a point.
    pub truth: Option<f64>,
}

impl Reliability {
    pub fn point(r: f64) -> Self {
        Self {
            lower: r,
            upper: r,
            truth: None,
        }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            truth: None,
        }
    }

    pub fn with_truth(mut self, truth: f64) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        if !ok(self.lower) || !ok(self.upper) || self.lower > self.upper {
            return Err(Error::InvalidRule(format!(
                "reliability [{}, {}] is not a probability interval",
                self.lower, self.upper
            )));
        }
        if let Some(t) = self.truth {
            if !ok(t) {
                return Err(Error::InvalidRule(format!("point reliability {t} is not a probability")));
            }
        }
        Ok(())
    }

    /// The value used by the precise engine.
    pub fn point_value(&self) -> Result<f64> {
        match self.truth {
            Some(t) => Ok(t),
            None if self.lower == self.upper => Ok(self.lower),
            None => Err(Error::InvalidRule(format!(
                "the precise engine needs a point reliability, got [{}, {}]",
                self.lower, self.upper
            ))),
        }
    }
}

/// A variable fixed to one of its states, e.g. `S=1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub variable: String,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RuleKind {
    /// `target = a1 + a2 + ...` on integer-labelled frames.
    Sum { target: String, addends: Vec<String> },
    /// Material conditional `antecedent -> consequent`.
    Implies { antecedent: Assignment, consequent: Assignment },
    /// `variable = state`.
    Assign(Assignment),
    /// Explicit `[lower, upper]` per configuration in canonical order.
    Table { rows: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub kind: RuleKind,
    /// Ignored for tables.
    pub reliability: Reliability,
}

impl RuleSpec {
    /// Variables the relation refers to.
    pub fn participants(&self) -> Vec<&str> {
        match &self.kind {
            RuleKind::Sum { target, addends } => std::iter::once(target.as_str())
                .chain(addends.iter().map(String::as_str))
                .collect(),
            RuleKind::Implies { antecedent, consequent } => {
                vec![antecedent.variable.as_str(), consequent.variable.as_str()]
            }
            RuleKind::Assign(a) => vec![a.variable.as_str()],
            RuleKind::Table { .. } => Vec::new(),
        }
    }
}

/// Configurations where a relation holds (`satisfying`) and where it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfyingSet {
    pub satisfying: Vec<usize>,
    pub violating: Vec<usize>,
}

fn integer_labels(domain: &Domain, name: &str) -> Result<(usize, Vec<i64>)> {
    let pos = domain
        .position(name)
        .ok_or_else(|| Error::InvalidRule(format!("variable `{name}` is not in the rule domain {domain}")))?;
    let labels = domain.variables()[pos]
        .states()
        .iter()
        .map(|s| {
            s.parse::<i64>().map_err(|_| {
                Error::InvalidRule(format!("state `{s}` of `{name}` is not an integer; sum rules need integer frames"))
            })
        })
        .collect::<Result<_>>()?;
    Ok((pos, labels))
}

fn assignment_index(domain: &Domain, a: &Assignment) -> Result<(usize, usize)> {
    let pos = domain.position(&a.variable).ok_or_else(|| {
        Error::InvalidRule(format!("variable `{}` is not in the rule domain {domain}", a.variable))
    })?;
    let state = domain.variables()[pos].state_index(&a.state).ok_or_else(|| {
        Error::InvalidRule(format!("`{}` is not a state of `{}`", a.state, a.variable))
    })?;
    Ok((pos, state))
}

/// Enumerates the configurations of `domain` on which the relation holds.
pub fn satisfying_set(rule: &RuleSpec, domain: &Domain) -> Result<SatisfyingSet> {
    let holds: Box<dyn Fn(&[usize]) -> bool> = match &rule.kind {
        RuleKind::Sum { target, addends } => {
            if addends.is_empty() {
                return Err(Error::InvalidRule(format!("sum rule for `{target}` has no addends")));
            }
            let (t_pos, t_labels) = integer_labels(domain, target)?;
            let addends = addends
                .iter()
                .map(|a| integer_labels(domain, a))
                .collect::<Result<Vec<_>>>()?;
            // every reachable sum must be a state of the target
            if let Some(s) = addend_sums(&addends).into_iter().find(|s| !t_labels.contains(s)) {
                return Err(Error::UnsatisfiableRule(format!(
                    "`{target}` has no state {s}, which `{}` can reach",
                    rule.participants()[1..].join(" + ")
                )));
            }
            Box::new(move |st: &[usize]| {
                let sum: i64 = addends.iter().map(|(p, l)| l[st[*p]]).sum();
                t_labels[st[t_pos]] == sum
            })
        }
        RuleKind::Implies { antecedent, consequent } => {
            let (a_pos, a_state) = assignment_index(domain, antecedent)?;
            let (c_pos, c_state) = assignment_index(domain, consequent)?;
            Box::new(move |st: &[usize]| st[a_pos] != a_state || st[c_pos] == c_state)
        }
        RuleKind::Assign(a) => {
            let (pos, state) = assignment_index(domain, a)?;
            Box::new(move |st: &[usize]| st[pos] == state)
        }
        RuleKind::Table { .. } => {
            return Err(Error::InvalidRule("tables have no satisfying set".into()));
        }
    };
    let (satisfying, violating): (Vec<usize>, Vec<usize>) =
        (0..domain.cardinality()).partition(|&i| holds(&domain.decode(i)));
    if satisfying.is_empty() {
        return Err(Error::UnsatisfiableRule(format!("no configuration of {domain} satisfies the rule")));
    }
    Ok(SatisfyingSet { satisfying, violating })
}

fn addend_sums(addends: &[(usize, Vec<i64>)]) -> Vec<i64> {
    let mut sums = vec![0i64];
    for (_, labels) in addends {
        sums = sums
            .iter()
            .flat_map(|s| labels.iter().map(move |l| s + l))
            .collect();
        sums.sort_unstable();
        sums.dedup();
    }
    sums
}

/// Builds the valuation a rule denotes on `domain` in the given algebra.
pub fn compile_rule(rule: &RuleSpec, domain: &Domain, engine: EngineKind) -> Result<Valuation> {
    if let RuleKind::Table { rows } = &rule.kind {
        return compile_table(rows, domain, engine);
    }
    rule.reliability.validate()?;
    let set = satisfying_set(rule, domain)?;
    let n = domain.cardinality();
    let (ns, nv) = (set.satisfying.len() as f64, set.violating.len() as f64);
    match engine {
        EngineKind::Precise => {
            let r = rule.reliability.point_value()?;
            if set.violating.is_empty() && r != 1.0 {
                return Err(Error::InvalidRule(format!(
                    "the rule holds everywhere on {domain}, so its reliability must be 1"
                )));
            }
            let mut probs = vec![0.0; n];
            for &i in &set.satisfying {
                probs[i] = r / ns;
            }
            for &i in &set.violating {
                probs[i] = (1.0 - r) / nv;
            }
            Ok(Valuation::Pmf(PmfValuation::new(domain.clone(), probs)?))
        }
        EngineKind::Credal => {
            let Reliability { lower: l, upper: u, .. } = rule.reliability;
            if set.violating.is_empty() && u != 1.0 {
                return Err(Error::InvalidRule(format!(
                    "the rule holds everywhere on {domain}, so its reliability upper bound must be 1"
                )));
            }
            let mut lo = vec![0.0; n];
            let mut up = vec![0.0; n];
            for &i in &set.satisfying {
                lo[i] = l / ns;
                up[i] = u / ns;
            }
            for &i in &set.violating {
                lo[i] = (1.0 - u) / nv;
                up[i] = (1.0 - l) / nv;
            }
            Ok(Valuation::Interval(IntervalValuation::new(domain.clone(), lo, up)?))
        }
    }
}

fn compile_table(rows: &[(f64, f64)], domain: &Domain, engine: EngineKind) -> Result<Valuation> {
    if rows.len() != domain.cardinality() {
        return Err(Error::InvalidRule(format!(
            "table on {domain} needs {} rows, got {}",
            domain.cardinality(),
            rows.len()
        )));
    }
    let lower: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let upper: Vec<f64> = rows.iter().map(|r| r.1).collect();
    match engine {
        EngineKind::Precise => {
            if rows.iter().any(|(l, u)| l != u) {
                return Err(Error::InvalidRule(format!(
                    "the precise engine needs point rows in the table on {domain}"
                )));
            }
            Ok(Valuation::Pmf(PmfValuation::new(domain.clone(), lower)?))
        }
        EngineKind::Credal => Ok(Valuation::Interval(IntervalValuation::new(domain.clone(), lower, upper)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Variable;
    use crate::interval::check_coherence;

    fn var(name: &str, n: usize) -> Variable {
        Variable::with_range(name, n).unwrap()
    }

    fn assign(v: &str, s: &str) -> Assignment {
        Assignment {
            variable: v.into(),
            state: s.into(),
        }
    }

    fn sum_rule() -> RuleSpec {
        RuleSpec {
            kind: RuleKind::Sum {
                target: "A".into(),
                addends: vec!["D".into(), "T".into()],
            },
            reliability: Reliability::interval(0.96, 1.0).with_truth(1.0),
        }
    }

    #[test]
    fn sum_rule_satisfying_set() {
        let d = Domain::new(vec![var("A", 5), var("D", 3), var("T", 3)]).unwrap();
        let s = satisfying_set(&sum_rule(), &d).unwrap();
        assert_eq!(s.satisfying.len(), 9);
        assert_eq!(s.violating.len(), 36);
        // brute force over the 45 configurations
        let mut count = 0;
        for a in 0..5 {
            for dd in 0..3 {
                for t in 0..3 {
                    if a == dd + t {
                        count += 1;
                        assert!(s.satisfying.contains(&d.encode(&[a, dd, t]).unwrap()));
                    }
                }
            }
        }
        assert_eq!(count, 9);
    }

    #[test]
    fn implication_truth_table() {
        let d = Domain::new(vec![var("S", 2), var("R", 2)]).unwrap();
        let rule = RuleSpec {
            kind: RuleKind::Implies {
                antecedent: assign("S", "1"),
                consequent: assign("R", "0"),
            },
            reliability: Reliability::point(0.89),
        };
        let s = satisfying_set(&rule, &d).unwrap();
        // canonical order is R, S: the violating configuration is R=1,S=1
        assert_eq!(s.violating, vec![d.encode(&[1, 1]).unwrap()]);
        let v = compile_rule(&rule, &d, EngineKind::Precise).unwrap();
        let p = v.as_pmf().unwrap().probs().to_vec();
        assert!((p[3] - 0.11).abs() < 1e-15);
        for x in &p[..3] {
            assert!((x - 0.89 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn assign_rule_intervals() {
        let d = Domain::single(var("L", 2));
        let rule = RuleSpec {
            kind: RuleKind::Assign(assign("L", "1")),
            reliability: Reliability::interval(0.80, 0.83),
        };
        assert_eq!(satisfying_set(&rule, &d).unwrap().satisfying, vec![1]);
        let v = compile_rule(&rule, &d, EngineKind::Credal).unwrap();
        let k = v.as_interval().unwrap();
        let want_lo = [0.17, 0.80];
        let want_up = [0.20, 0.83];
        for i in 0..2 {
            assert!((k.lower()[i] - want_lo[i]).abs() < 1e-12);
            assert!((k.upper()[i] - want_up[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn certain_rule_puts_no_mass_on_violations() {
        let d = Domain::new(vec![var("A", 5), var("D", 3), var("T", 3)]).unwrap();
        let mut rule = sum_rule();
        rule.reliability = Reliability::point(1.0);
        let v = compile_rule(&rule, &d, EngineKind::Credal).unwrap();
        let set = satisfying_set(&rule, &d).unwrap();
        let k = v.as_interval().unwrap();
        for &i in &set.violating {
            assert_eq!(k.upper()[i], 0.0);
        }
    }

    #[test]
    fn precise_engine_uses_truth() {
        let d = Domain::new(vec![var("A", 5), var("D", 3), var("T", 3)]).unwrap();
        let v = compile_rule(&sum_rule(), &d, EngineKind::Precise).unwrap();
        let p = v.as_pmf().unwrap();
        assert!((p.probs().iter().filter(|x| **x > 0.0).count() - 9) == 0);
        let mut rule = sum_rule();
        rule.reliability.truth = None;
        assert!(matches!(compile_rule(&rule, &d, EngineKind::Precise), Err(Error::InvalidRule(_))));
    }

    #[test]
    fn target_frame_too_small() {
        let d = Domain::new(vec![var("A", 3), var("D", 3), var("T", 3)]).unwrap();
        let err = satisfying_set(&sum_rule(), &d).unwrap_err();
        assert!(matches!(err, Error::UnsatisfiableRule(_)), "{err}");
    }

    #[test]
    fn non_integer_labels_rejected() {
        let a = Variable::new("A", vec!["lo".into(), "hi".into()]).unwrap();
        let d = Domain::new(vec![a, var("D", 2), var("T", 2)]).unwrap();
        assert!(matches!(satisfying_set(&sum_rule(), &d), Err(Error::InvalidRule(_))));
    }

    #[test]
    fn bad_reliability_rejected() {
        let d = Domain::single(var("L", 2));
        let rule = RuleSpec {
            kind: RuleKind::Assign(assign("L", "1")),
            reliability: Reliability::interval(0.9, 0.8),
        };
        assert!(matches!(compile_rule(&rule, &d, EngineKind::Credal), Err(Error::InvalidRule(_))));
    }

    #[test]
    fn point_interval_equals_precise() {
        let d = Domain::new(vec![var("D", 3), var("L", 2), var("S", 2)]).unwrap();
        let rule = RuleSpec {
            kind: RuleKind::Sum {
                target: "D".into(),
                addends: vec!["L".into(), "S".into()],
            },
            reliability: Reliability::point(0.91),
        };
        let k = compile_rule(&rule, &d, EngineKind::Credal).unwrap();
        let p = compile_rule(&rule, &d, EngineKind::Precise).unwrap();
        let k = k.as_interval().unwrap();
        assert_eq!(k.lower(), p.as_pmf().unwrap().probs());
        assert_eq!(k.upper(), p.as_pmf().unwrap().probs());
        assert!(check_coherence(k).is_coherent());
    }

    #[test]
    fn widening_never_shrinks() {
        let d = Domain::new(vec![var("R", 2), var("T", 3), var("W", 2)]).unwrap();
        let mk = |l, u| RuleSpec {
            kind: RuleKind::Sum {
                target: "T".into(),
                addends: vec!["R".into(), "W".into()],
            },
            reliability: Reliability::interval(l, u),
        };
        let narrow = compile_rule(&mk(0.92, 0.95), &d, EngineKind::Credal).unwrap();
        let wide = compile_rule(&mk(0.85, 0.99), &d, EngineKind::Credal).unwrap();
        let (n, w) = (narrow.as_interval().unwrap(), wide.as_interval().unwrap());
        for i in 0..n.len() {
            assert!(w.lower()[i] <= n.lower()[i] + 1e-15);
            assert!(w.upper()[i] >= n.upper()[i] - 1e-15);
        }
    }

    #[test]
    fn table_rows_must_match_cardinality() {
        let d = Domain::single(var("X", 2));
        let rule = RuleSpec {
            kind: RuleKind::Table { rows: vec![(0.5, 0.5)] },
            reliability: Reliability::point(1.0),
        };
        assert!(compile_rule(&rule, &d, EngineKind::Credal).is_err());
    }
}
