use thiserror::Error;

use crate::graph::NodeRef;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid system: {0}")]
    Validation(String),

    #[error("evaluation failed: {0}")]
    Eval(String),

    #[error("enumeration budget exceeded: {needed} realizations, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("conditioning search too wide: {candidates} candidates at t={time}, cap {cap}")]
    SearchCapExceeded { time: usize, candidates: usize, cap: usize },

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("no information path reaches {0}")]
    NoPathFound(NodeRef),

    #[error("flow traced back to {0}, which is not an input node")]
    ModelViolationAtInput(NodeRef),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn query(msg: impl Into<String>) -> Self {
        Error::InvalidQuery(msg.into())
    }
}
