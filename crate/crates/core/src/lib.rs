//! Valuation networks over precise probability mass functions and over
//! credal sets given by probability intervals on singletons, with exact
//! local-computation inference.
//!
//! The building blocks are [`domain`] (variables and configuration indexing),
//! [`pmf`] and [`interval`] (the two kinds of valuation), [`algebra`]
//! (combination and marginalization), [`optim`] (the bilinear programs behind
//! credal combination), [`network`] (fusion over a binary join tree),
//! [`rules`] (knowledge statements to valuations), [`eval`] (accuracy metrics)
//! and [`cli`] (the `.cvn` file format and command implementations).

pub mod algebra;
pub mod cli;
pub mod domain;
pub mod error;
pub mod eval;
pub mod interval;
pub mod network;
pub mod optim;
pub mod pmf;
pub mod rules;
pub mod vertex;

pub use algebra::{combine, eliminate, EngineKind, Valuation};
pub use domain::{Domain, Variable};
pub use error::{Error, Result};
pub use interval::{check_coherence, tighten_to_reachable, CoherenceReport, IntervalValuation};
pub use network::{build_join_tree, default_order, fuse, EliminationOrder, JoinTree, NamedValuation, ValuationNetwork};
pub use optim::{SolverConfig, SolverKind};
pub use pmf::PmfValuation;
