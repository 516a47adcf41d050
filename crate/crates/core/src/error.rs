use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A word or document could not be parsed. `position` is a character offset.
    #[error("malformed input at position {position}: {message}")]
    Malformed { position: usize, message: String },

    #[error("alphabet mismatch: rank {left} vs rank {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured enumeration or iteration budget would be exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// An internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
