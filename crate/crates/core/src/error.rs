use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),

    /// The requested combination has no implemented formula.
    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
