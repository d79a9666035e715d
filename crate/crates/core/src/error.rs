use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum SpaError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity guard exceeded: {0}")]
    Capacity(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SpaError>;

impl SpaError {
    pub fn domain(msg: impl Into<String>) -> Self {
        SpaError::Domain(msg.into())
    }
    pub fn capacity(msg: impl Into<String>) -> Self {
        SpaError::Capacity(msg.into())
    }
    pub fn unsupported(msg: impl Into<String>) -> Self {
        SpaError::Unsupported(msg.into())
    }
}
