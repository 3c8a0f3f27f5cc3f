use std::path::PathBuf;

use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = ScwfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ScwfError {
    /// An argument violates a shape or range precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("target expression: {0}")]
    Parse(#[from] ParseError),

    #[error("target evaluation: {0}")]
    Eval(#[from] EvalError),

    /// The relative error is undefined for an identically zero target.
    #[error("relative error undefined: target velocity is identically zero")]
    ZeroTarget,

    #[error("training diverged at iteration {iter}: loss = {loss}")]
    Divergence { iter: usize, loss: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl ScwfError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ScwfError::Domain(msg.into())
    }

    /// True for errors caused by invalid user input rather than a failed run.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, ScwfError::Divergence { .. } | ScwfError::Io { .. })
    }
}
