//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or malformed input data.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Time index outside `1..=T`.
    #[error("time index {t} out of range 1..={t_len}")]
    TimeIndex { t: usize, t_len: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("projection radii required for this step variant")]
    MissingRadii,

    /// Teacher spec and initialization disagree on the recurrent weight scale.
    #[error("alpha mismatch: teacher has {spec}, params were initialized with {params}")]
    AlphaMismatch { spec: f64, params: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Exit code the CLI maps this error to (2 for config, 1 for runtime).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::DimensionMismatch { .. }
            | Error::MissingRadii
            | Error::AlphaMismatch { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
