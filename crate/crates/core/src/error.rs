use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not {kind} (deviation {deviation:.3e})")]
    NotStructured { kind: &'static str, deviation: f64 },

    #[error("precondition violated: {what} (measured {measured:.3e}, tolerance {tolerance:.3e})")]
    Precondition {
        what: &'static str,
        measured: f64,
        tolerance: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Numerical(String),

    #[error("F2 complex: {0}")]
    Complex(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
