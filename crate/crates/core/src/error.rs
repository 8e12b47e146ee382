use std::path::PathBuf;

/// Errors produced anywhere in the BTCP pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },

    #[error("metric {metric} is undefined: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: &'static str,
    },

    #[error("non-finite gradient in parameter {param} (index {index}, value {value})")]
    NonFiniteGradient {
        param: String,
        index: usize,
        value: f64,
    },

    #[error("non-finite loss in stage {stage}, epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        stage: &'static str,
        epoch: usize,
        batch: usize,
    },

    #[error(
        "stale forward cache: recorded for parameter version {cached}, network is at {current}"
    )]
    StaleCache { cached: u64, current: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {path} at byte {offset}: {message}")]
    Parse {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
