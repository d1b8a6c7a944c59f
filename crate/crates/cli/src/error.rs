use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error in {field}: {message}")]
    Config { field: String, message: String },

    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error(transparent)]
    Core(#[from] skewlab_core::error::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("probe failed: {0}")]
    Probe(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
