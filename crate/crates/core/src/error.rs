//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("self-loop dyad ({0}, {0}) is not allowed")]
    SelfLoop(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("missing attribute `{0}`")]
    MissingAttribute(String),

    #[error("term argument out of range: {0}")]
    TermOutOfRange(String),

    #[error("exact enumeration refused: n={n} exceeds cap={cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("too many unobserved dyads for exact summation: {0} > 20")]
    TooManyMissing(usize),

    #[error("maximum likelihood estimate does not exist: {0}")]
    MleNonexistent(String),

    #[error("pseudo-likelihood separation: {0}")]
    Separation(String),

    #[error("model not identifiable: {0}")]
    NonIdentifiable(String),

    #[error("importance weights degenerate: {0}")]
    EssDegenerate(String),

    #[error("estimate diverged: {0}")]
    Diverged(String),

    #[error("non-ignorable observation design: {0}")]
    NonIgnorableDesign(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}
