use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SalemError {
    /// Precondition on an input was violated.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A resource cap was hit; the computation is reported, not truncated.
    #[error("infeasible under caps: {0}")]
    Infeasible(String),
    #[error("not a codeword: {0}")]
    NonCodeword(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl SalemError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SalemError::Invalid(msg.into())
    }
    pub fn infeasible(msg: impl Into<String>) -> Self {
        SalemError::Infeasible(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SalemError>;
