use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("support {0} is not contained in {1}")]
    SupportNotContained(String, String),
    #[error("site {0} is not in the region")]
    SiteNotInSupport(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("not self-adjoint with respect to the GNS inner product (residual {0:e})")]
    NotSelfAdjoint(f64),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
