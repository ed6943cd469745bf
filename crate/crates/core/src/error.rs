use thiserror::Error;

use crate::instance::{AgentId, Pair};

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),

    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),

    #[error("pair {0} is not acceptable")]
    NotAcceptable(Pair),

    #[error("not a matching in this instance: {0}")]
    NotAMatching(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} has {count} elements, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        count: usize,
        cap: usize,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
