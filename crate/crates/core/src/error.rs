use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A configured resource cap was hit before the computation finished.
    #[error("resource cap `{cap}` exceeded (limit {limit})")]
    Resource { cap: &'static str, limit: usize },

    #[error("distribution mass would exceed 1")]
    MassOverflow,

    #[error("tree level mismatch: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },

    #[error("invalid probability `{0}`")]
    BadProbability(String),

    #[error("invalid assignment problem: {0}")]
    BadProblem(String),

    #[error("term must be closed: {0}")]
    NotClosed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
