use thiserror::Error;

/// Errors raised across the sampling laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampler configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("transition matrix check failed: {0}")]
    Discretization(String),

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing baseline: {0}")]
    MissingBaseline(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
