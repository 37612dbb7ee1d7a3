//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A tensor primitive was fed incompatible extents.
    #[error("{primitive}: shape mismatch: {detail}")]
    Shape {
        primitive: &'static str,
        detail: String,
    },

    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error at {path}:{line}: {msg}")]
    Data {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("parameter error: {0}")]
    Param(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    /// Training aborts on the first non-finite loss with a diagnostic dump.
    #[error(
        "non-finite loss {loss} at step {step} \
         (keep_rate={keep_rate}, l2_ratio={l2_ratio}, grad_norm={grad_norm})"
    )]
    NonFiniteLoss {
        step: u64,
        loss: f64,
        keep_rate: f64,
        l2_ratio: f64,
        grad_norm: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(primitive: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            primitive,
            detail: detail.into(),
        }
    }
}
