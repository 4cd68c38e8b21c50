use thiserror::Error;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),
    #[error("ordering error: {0}")]
    Ordering(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("resampling error: {0}")]
    Resampling(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
