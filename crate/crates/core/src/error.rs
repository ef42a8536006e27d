use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} = {size} exceeds the limit {limit}")]
    SpaceTooLarge { what: String, size: f64, limit: f64 },
    #[error("intractable: {0}")]
    Intractable(String),
    #[error("coordinate {index} out of range for {len} coordinates")]
    OutOfRange { index: usize, len: usize },
    #[error("method unavailable: {0}")]
    MethodUnavailable(String),
    #[error("zero norm: {0}")]
    ZeroNorm(String),
    #[error("incompatible scheme: {0}")]
    Incompatible(String),
    #[error("non-finite matrix entries")]
    NonFinite,
    #[error("{solver} did not converge after {iterations} iterations (residuals {residuals:?})")]
    NonConvergence {
        solver: String,
        iterations: usize,
        residuals: Vec<f64>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn guard(what: impl Into<String>, size: f64, limit: f64) -> Self {
        Error::SpaceTooLarge {
            what: what.into(),
            size,
            limit,
        }
    }

    /// True for errors raised by an enumeration or dimension guard.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::SpaceTooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
