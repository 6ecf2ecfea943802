use thiserror::Error;

use crate::algorithms::Precondition;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("item index {0} is not part of the instance")]
    InvalidItem(usize),
    #[error("agent index {agent} out of range for {n} agents")]
    InvalidAgent { agent: usize, n: usize },
    #[error("rank {k} out of range 1..={len}")]
    IndexOutOfRange { k: usize, len: usize },
    #[error("instances are limited to {max} items, got {got}")]
    TooManyItems { got: usize, max: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("allocation leaves {unallocated} item(s) unallocated")]
    IncompleteAllocation { unallocated: usize },
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(Precondition),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("formula is not (2/2/3): {0}")]
    Not223Formula(String),
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid document field {field}: {message}")]
    Document { field: String, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn document(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Document { field: field.into(), message: message.into() }
    }
}
