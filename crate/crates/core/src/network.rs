//! Valuation networks and the fusion algorithm.
//!
//! Fusion eliminates the non-query variables one at a time. For each variable
//! the valuations that mention it are combined two at a time, the variable is
//! marginalized out, and the result goes back into the pool. The sequence of
//! combinations and eliminations is recorded as a binary join tree which can
//! be evaluated (and re-evaluated) independently of the construction.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::algebra::{combine, eliminate, EngineKind, Valuation};
use crate::domain::{Domain, Variable};
use crate::error::{Error, Result};
use crate::optim::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedValuation {
    pub name: String,
    pub valuation: Valuation,
}

impl NamedValuation {
    pub fn new(name: impl Into<String>, valuation: Valuation) -> Self {
        Self {
            name: name.into(),
            valuation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationNetwork {
    variables: BTreeMap<String, Variable>,
    valuations: Vec<NamedValuation>,
    query: Domain,
    kind: EngineKind,
}

impl ValuationNetwork {
    pub fn new(variables: Vec<Variable>, valuations: Vec<NamedValuation>, query: &[&str]) -> Result<Self> {
        let mut vars = BTreeMap::new();
        for v in variables {
            let name = v.name().to_string();
            if vars.insert(name.clone(), v).is_some() {
                return Err(Error::Network(format!("variable `{name}` declared twice")));
            }
        }
        let Some(first) = valuations.first() else {
            return Err(Error::Network("network has no valuations".into()));
        };
        let kind = first.valuation.kind();
        for (i, nv) in valuations.iter().enumerate() {
            if valuations[..i].iter().any(|o| o.name == nv.name) {
                return Err(Error::Network(format!("valuation name `{}` used twice", nv.name)));
            }
            if nv.valuation.kind() != kind {
                return Err(Error::KindMismatch(format!(
                    "valuation `{}` is {} but the network is {kind}",
                    nv.name,
                    nv.valuation.kind()
                )));
            }
            for v in nv.valuation.label().variables() {
                if vars.get(v.name()) != Some(v) {
                    return Err(Error::Network(format!(
                        "valuation `{}` uses undeclared or mismatched variable `{}`",
                        nv.name,
                        v.name()
                    )));
                }
            }
        }
        for name in vars.keys() {
            if !valuations.iter().any(|nv| nv.valuation.label().contains(name)) {
                return Err(Error::Network(format!("variable `{name}` appears in no valuation")));
            }
        }
        if query.is_empty() {
            return Err(Error::Network("no query variable".into()));
        }
        let query_vars = query
            .iter()
            .map(|q| {
                vars.get(*q)
                    .cloned()
                    .ok_or_else(|| Error::Network(format!("query variable `{q}` is not declared")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            variables: vars,
            valuations,
            query: Domain::new(query_vars)?,
            kind,
        })
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.variables.values()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.get(name)
    }

    pub fn valuations(&self) -> &[NamedValuation] {
        &self.valuations
    }

    pub fn query(&self) -> &Domain {
        &self.query
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    /// Variables that fusion has to eliminate, by name.
    pub fn non_query_variables(&self) -> Vec<&str> {
        self.variables
            .keys()
            .filter(|n| !self.query.contains(n))
            .map(String::as_str)
            .collect()
    }
}

/// The order in which non-query variables are eliminated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder(Vec<String>);

impl EliminationOrder {
    /// Checks that `names` is a permutation of the network's non-query variables.
    pub fn new(net: &ValuationNetwork, names: Vec<String>) -> Result<Self> {
        let mut expected: Vec<&str> = net.non_query_variables();
        let mut given: Vec<&str> = names.iter().map(String::as_str).collect();
        expected.sort_unstable();
        given.sort_unstable();
        if expected != given {
            let missing: Vec<&str> = expected.iter().filter(|e| !given.contains(e)).copied().collect();
            let extra: Vec<&str> = given.iter().filter(|g| !expected.contains(g)).copied().collect();
            return Err(Error::InvalidOrder(format!(
                "order must list each non-query variable exactly once (missing {missing:?}, unexpected {extra:?})"
            )));
        }
        Ok(Self(names))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }
}

/// Greedy order: repeatedly eliminate the variable whose clique has the
/// fewest configurations, ties broken by name.
pub fn default_order(net: &ValuationNetwork) -> EliminationOrder {
    let mut pool: Vec<Domain> = net.valuations.iter().map(|v| v.valuation.label().clone()).collect();
    let mut remaining: Vec<&str> = net.non_query_variables();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let (pos, clique) = remaining
            .iter()
            .enumerate()
            .map(|(i, x)| (i, clique_of(&pool, x)))
            .min_by(|(i, a), (j, b)| {
                a.cardinality()
                    .cmp(&b.cardinality())
                    .then_with(|| remaining[*i].cmp(remaining[*j]))
            })
            .expect("remaining is nonempty");
        let x = remaining.remove(pos);
        pool.retain(|d| !d.contains(x));
        pool.push(clique.without(x));
        order.push(x.to_string());
    }
    EliminationOrder(order)
}

fn clique_of(pool: &[Domain], x: &str) -> Domain {
    pool.iter()
        .filter(|d| d.contains(x))
        .fold(Domain::empty(), |acc, d| acc.union(d).expect("network frames are consistent"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeOp {
    Leaf(Valuation),
    Combine { left: usize, right: usize },
    Eliminate { child: usize, variable: String },
    Marginalize { child: usize },
}

#[derive(Debug)]
pub struct JoinTreeNode {
    pub id: usize,
    pub name: String,
    pub domain: Domain,
    pub op: NodeOp,
    payload: OnceLock<Valuation>,
}

impl JoinTreeNode {
    pub fn children(&self) -> Vec<usize> {
        match &self.op {
            NodeOp::Leaf(_) => Vec::new(),
            NodeOp::Combine { left, right } => vec![*left, *right],
            NodeOp::Eliminate { child, .. } | NodeOp::Marginalize { child } => vec![*child],
        }
    }

    /// The valuation computed at this node, once evaluated.
    pub fn payload(&self) -> Option<&Valuation> {
        match &self.op {
            NodeOp::Leaf(v) => Some(v),
            _ => self.payload.get(),
        }
    }
}

/// Binary join tree: every internal combination node has exactly two children.
#[derive(Debug)]
pub struct JoinTree {
    nodes: Vec<JoinTreeNode>,
    root: usize,
    cliques: Vec<Domain>,
    order: EliminationOrder,
}

struct TreeBuilder {
    nodes: Vec<JoinTreeNode>,
}

impl TreeBuilder {
    fn push(&mut self, name: String, domain: Domain, op: NodeOp) -> usize {
        let id = self.nodes.len();
        self.nodes.push(JoinTreeNode {
            id,
            name,
            domain,
            op,
            payload: OnceLock::new(),
        });
        id
    }

    /// Combines `ids` two at a time, smallest resulting domain first.
    fn combine_all(&mut self, mut ids: Vec<usize>) -> Result<usize> {
        while ids.len() > 1 {
            let mut best: Option<(usize, usize, Domain)> = None;
            for a in 0..ids.len() {
                for b in a + 1..ids.len() {
                    let (na, nb) = (&self.nodes[ids[a]], &self.nodes[ids[b]]);
                    let joint = na.domain.union(&nb.domain)?;
                    let better = match &best {
                        None => true,
                        Some((ba, bb, bd)) => {
                            let key = |x: usize, y: usize| {
                                let (p, q) = (&self.nodes[ids[x]].name, &self.nodes[ids[y]].name);
                                if p <= q {
                                    (p.clone(), q.clone())
                                } else {
                                    (q.clone(), p.clone())
                                }
                            };
                            joint.cardinality() < bd.cardinality()
                                || (joint.cardinality() == bd.cardinality() && key(a, b) < key(*ba, *bb))
                        }
                    };
                    if better {
                        best = Some((a, b, joint));
                    }
                }
            }
            let (a, b, joint) = best.expect("at least two candidates");
            let (left, right) = (ids[a], ids[b]);
            let name = format!("({}*{})", self.nodes[left].name, self.nodes[right].name);
            let id = self.push(name, joint, NodeOp::Combine { left, right });
            ids.remove(b);
            ids.remove(a);
            ids.push(id);
        }
        Ok(ids[0])
    }
}

/// Records the combination/elimination structure of fusion for `order`.
pub fn build_join_tree(net: &ValuationNetwork, order: &EliminationOrder) -> Result<JoinTree> {
    let order = EliminationOrder::new(net, order.names().to_vec())?;
    let mut tb = TreeBuilder { nodes: Vec::new() };
    let mut pool: Vec<usize> = net
        .valuations
        .iter()
        .map(|nv| tb.push(nv.name.clone(), nv.valuation.label().clone(), NodeOp::Leaf(nv.valuation.clone())))
        .collect();
    let mut cliques = Vec::new();
    for x in order.names() {
        let (with_x, rest): (Vec<usize>, Vec<usize>) =
            pool.iter().partition(|&&id| tb.nodes[id].domain.contains(x));
        if with_x.is_empty() {
            continue;
        }
        let clique = with_x
            .iter()
            .try_fold(Domain::empty(), |acc, &id| acc.union(&tb.nodes[id].domain))?;
        cliques.push(clique);
        let product = tb.combine_all(with_x)?;
        let domain = tb.nodes[product].domain.without(x);
        let name = format!("{}-{x}", tb.nodes[product].name);
        let reduced = tb.push(
            name,
            domain,
            NodeOp::Eliminate {
                child: product,
                variable: x.clone(),
            },
        );
        pool = rest;
        pool.push(reduced);
    }
    let final_clique = pool
        .iter()
        .try_fold(Domain::empty(), |acc, &id| acc.union(&tb.nodes[id].domain))?;
    cliques.push(final_clique);
    let mut root = tb.combine_all(pool)?;
    if &tb.nodes[root].domain != net.query() {
        let name = format!("{}>{}", tb.nodes[root].name, net.query());
        root = tb.push(name, net.query().clone(), NodeOp::Marginalize { child: root });
    }
    Ok(JoinTree {
        nodes: tb.nodes,
        root,
        cliques,
        order,
    })
}

impl JoinTree {
    pub fn nodes(&self) -> &[JoinTreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn order(&self) -> &EliminationOrder {
        &self.order
    }

    /// Joint domains formed while eliminating each variable, then the final pool.
    pub fn cliques(&self) -> &[Domain] {
        &self.cliques
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.op, NodeOp::Leaf(_))).count()
    }

    /// Evaluates the tree, caching every node's valuation for later queries.
    pub fn evaluate(&self, cfg: &SolverConfig) -> Result<Valuation> {
        self.eval_node(self.root, cfg, true)
    }

    /// Evaluates the tree from scratch, ignoring cached node valuations.
    pub fn replay(&self, cfg: &SolverConfig) -> Result<Valuation> {
        self.eval_node(self.root, cfg, false)
    }

    /// Marginal of an already evaluated node, e.g. to query a sub-result.
    pub fn node_value(&self, id: usize, cfg: &SolverConfig) -> Result<Valuation> {
        self.eval_node(id, cfg, true)
    }

    fn eval_node(&self, id: usize, cfg: &SolverConfig, cache: bool) -> Result<Valuation> {
        let node = &self.nodes[id];
        if cache {
            if let Some(v) = node.payload() {
                return Ok(v.clone());
            }
        }
        let value = match &node.op {
            NodeOp::Leaf(v) => return Ok(v.clone()),
            NodeOp::Combine { left, right } => {
                let (a, b) = rayon::join(|| self.eval_node(*left, cfg, cache), || self.eval_node(*right, cfg, cache));
                let (a, b) = (a?, b?);
                combine(&a, &b, cfg).map_err(|e| match e {
                    Error::TotalConflict(msg) => Error::TotalConflict(format!(
                        "combining `{}` with `{}`: {msg}",
                        self.nodes[*left].name, self.nodes[*right].name
                    )),
                    other => other,
                })?
            }
            NodeOp::Eliminate { child, variable } => eliminate(&self.eval_node(*child, cfg, cache)?, variable)?,
            NodeOp::Marginalize { child } => self.eval_node(*child, cfg, cache)?.marginalize(&node.domain)?,
        };
        if cache {
            let _ = node.payload.set(value.clone());
        }
        Ok(value)
    }
}

/// `(⊗ valuations)` marginalized to the query, by local computation.
pub fn fuse(net: &ValuationNetwork, order: &EliminationOrder, cfg: &SolverConfig) -> Result<Valuation> {
    build_join_tree(net, order)?.evaluate(cfg)
}
