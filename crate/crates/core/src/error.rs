use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by instance construction, solving, datasets and training.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or constructor arguments.
    #[error("configuration error: {0}")]
    Config(String),

    /// Shapes of two related objects disagree (assignment vs instance, model vs dataset, ...).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Instance too large for the brute-force enumeration budget.
    #[error("enumeration budget exceeded: {0}")]
    EnumerationBudget(String),

    /// Training input is degenerate (single class, empty fold, ...).
    #[error("invalid training data: {0}")]
    TrainingData(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
