use thiserror::Error;

/// Everything that can go wrong while building or evaluating a valuation network.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state index {state} out of range for variable `{variable}` (frame size {size})")]
    InvalidState {
        variable: String,
        state: usize,
        size: usize,
    },

    #[error("invalid variable: {0}")]
    InvalidVariable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("incoherent probability intervals: {0}")]
    Incoherent(String),

    #[error("empty credal set: {0}")]
    EmptyCredalSet(String),

    #[error("vertex enumeration refused: {what} is {size}, limit is {limit}")]
    ThresholdExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("total conflict: {0}")]
    TotalConflict(String),

    #[error("valuation kinds do not match: {0}")]
    KindMismatch(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("solver error: {0}")]
    Solver(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("unsatisfiable rule: {0}")]
    UnsatisfiableRule(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error("invalid elimination order: {0}")]
    InvalidOrder(String),
}

pub type Result<T> = std::result::Result<T, Error>;
