//! Variables, domains and the canonical configuration index.
//!
//! A [`Domain`] keeps its variables sorted by name. Configurations are
//! numbered in mixed radix with the last variable varying fastest, so a
//! domain `{D:3, T:3}` lays out `(D=0,T=0), (D=0,T=1), ..., (D=2,T=2)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named discrete variable with an ordered frame of state labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: Vec<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidVariable("empty variable name".into()));
        }
        if states.is_empty() {
            return Err(Error::InvalidVariable(format!("`{name}` has an empty frame")));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::InvalidVariable(format!(
                    "`{name}` has duplicate state label `{s}`"
                )));
            }
        }
        Ok(Self { name, states })
    }

    /// Variable whose frame is the integer labels `0..size`.
    pub fn with_range(name: impl Into<String>, size: usize) -> Result<Self> {
        Self::new(name, (0..size).map(|s| s.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// An ordered set of variables (ascending by name).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Domain {
    vars: Arc<[Variable]>,
}

impl Domain {
    /// The empty domain; its single configuration is the scalar valuation.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut vars: Vec<Variable>) -> Result<Self> {
        vars.sort_by(|a, b| a.name.cmp(&b.name));
        for w in vars.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::Domain(format!("duplicate variable `{}`", w[0].name)));
            }
        }
        Ok(Self { vars: vars.into() })
    }

    pub fn single(var: Variable) -> Self {
        Self {
            vars: vec![var].into(),
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|v| v.name())
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// `|Θ_D|`, the number of configurations.
    pub fn cardinality(&self) -> usize {
        self.vars.iter().map(Variable::size).product()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars
            .binary_search_by(|v| v.name.as_str().cmp(name))
            .ok()
    }

    pub fn get(&self, name: &str) -> Option<&Variable> {
        self.position(name).map(|i| &self.vars[i])
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.vars.iter().all(|v| other.get(&v.name) == Some(v))
    }

    pub fn union(&self, other: &Domain) -> Result<Domain> {
        let mut vars: Vec<Variable> = self.vars.to_vec();
        for v in other.vars.iter() {
            match self.get(&v.name) {
                Some(mine) if mine != v => {
                    return Err(Error::Domain(format!(
                        "variable `{}` appears with two different frames",
                        v.name
                    )))
                }
                Some(_) => {}
                None => vars.push(v.clone()),
            }
        }
        Domain::new(vars)
    }

    pub fn intersection(&self, other: &Domain) -> Domain {
        let vars = self
            .vars
            .iter()
            .filter(|v| other.get(&v.name) == Some(*v))
            .cloned()
            .collect();
        Domain { vars }
    }

    pub fn without(&self, name: &str) -> Domain {
        let vars = self.vars.iter().filter(|v| v.name != name).cloned().collect();
        Domain { vars }
    }

    /// Mixed-radix weight of each variable (last variable has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].size();
        }
        strides
    }

    pub fn encode(&self, states: &[usize]) -> Result<usize> {
        if states.len() != self.vars.len() {
            return Err(Error::Domain(format!(
                "expected {} state indices, got {}",
                self.vars.len(),
                states.len()
            )));
        }
        let mut index = 0;
        for (v, &s) in self.vars.iter().zip(states) {
            if s >= v.size() {
                return Err(Error::InvalidState {
                    variable: v.name.clone(),
                    state: s,
                    size: v.size(),
                });
            }
            index = index * v.size() + s;
        }
        Ok(index)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut states = vec![0; self.vars.len()];
        for (slot, v) in states.iter_mut().zip(self.vars.iter()).rev() {
            *slot = index % v.size();
            index /= v.size();
        }
        states
    }

    /// For each configuration of `self`, the index of its restriction to `sub`.
    pub fn projection(&self, sub: &Domain) -> Result<Vec<usize>> {
        if !sub.is_subset_of(self) {
            return Err(Error::Domain(format!("{sub} is not a subset of {self}")));
        }
        let sub_strides = sub.strides();
        // stride in `sub` for each variable of `self`, 0 when it is dropped
        let weights: Vec<usize> = self
            .vars
            .iter()
            .map(|v| sub.position(&v.name).map_or(0, |p| sub_strides[p]))
            .collect();
        let n = self.cardinality();
        let mut out = Vec::with_capacity(n);
        let mut states = vec![0usize; self.vars.len()];
        let mut current = 0usize;
        for _ in 0..n {
            out.push(current);
            // odometer increment, last variable fastest
            for k in (0..states.len()).rev() {
                states[k] += 1;
                current += weights[k];
                if states[k] < self.vars[k].size() {
                    break;
                }
                current -= weights[k] * states[k];
                states[k] = 0;
            }
        }
        Ok(out)
    }

    /// Human readable rendering of configuration `index`, e.g. `D=1,T=2`.
    pub fn describe(&self, index: usize) -> String {
        let states = self.decode(index);
        self.vars
            .iter()
            .zip(states)
            .map(|(v, s)| format!("{}={}", v.name, v.states[s]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v.name)?;
        }
        write!(f, "}}")
    }
}
