use thiserror::Error;

/// Everything that can go wrong before a computation produces a result.
///
/// Relation violations are not errors: verification functions return them
/// inside a [`crate::report::Report`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("operation needs a field, got {0}")]
    NotAField(String),
    #[error("operation needs the integers, got {0}")]
    NotIntegers(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("incompatible structures: {0}")]
    Incompatible(String),
    #[error("unverified input: {0}")]
    Unverified(String),
    #[error("invalid index tuple: {0}")]
    Tuple(String),
    #[error("missing binding for symbol {0}")]
    MissingBinding(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
