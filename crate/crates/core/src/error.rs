use thiserror::Error;

/// Errors produced by the gate-set library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular gauge transformation: {0}")]
    SingularGauge(String),

    #[error("enumeration of {requested} circuits exceeds the budget of {budget}")]
    ResourceLimit { requested: f64, budget: u64 },

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("malformed document: {0}")]
    Document(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
