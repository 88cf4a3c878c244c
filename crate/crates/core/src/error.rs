use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported group type `{0}`")]
    UnsupportedType(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("level is not admissible: h + c is not positive definite")]
    Inadmissible,
    #[error("torus point is singular")]
    SingularPoint,
    #[error("series ring mismatch: {0}")]
    RingMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("continuation failed: {0}")]
    Continuation(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
