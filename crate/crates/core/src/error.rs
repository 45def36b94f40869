//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by loading, validation, and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Input text could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input violated a documented invariant or precondition.
    #[error("{0}")]
    Validation(String),

    /// Two computation routes that must agree did not; signals corrupted
    /// inputs or an internal numerical failure rather than bad user input.
    #[error("numerical consistency failure: {0}")]
    Inconsistency(String),

    /// The prior configuration produced a degenerate per-tick probability.
    #[error("degenerate prior configuration: {0}")]
    PriorConfig(String),

    /// A block has no support in the data, so its height is unidentifiable.
    #[error("block {block} is not constrained by any datum")]
    UnconstrainedBlock { block: usize },

    /// The exhaustive changepoint search would be too large.
    #[error(
        "changepoint search space has {configurations} configurations \
         (limit {limit}); supply a coarser candidate set"
    )]
    SearchSpace { configurations: u128, limit: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
