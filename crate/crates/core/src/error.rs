use thiserror::Error;

/// Errors raised by the PAC library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum PacError {
    /// Malformed or inconsistent input (lengths, digits, indices).
    #[error("invalid input: {0}")]
    Input(String),

    /// A code could not be built (e.g. frozen set unusable for systematic encoding).
    #[error("construction failed: {0}")]
    Construction(String),

    /// The operation is not defined for this code family.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Numerical routine failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, PacError>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(PacError::Input(msg.into()))
}
