//! Error type and exit-code mapping for the command-line surface.
//!
//! Exit codes: 0 success, 1 internal failure, 2 usage or input error.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input not found: {path}")]
    InputNotFound { path: PathBuf },
    #[error("failed to read {path}: {source}")]
    ReadFailed {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to write {path}: {source}")]
    WriteFailed {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    BadInput { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("run directory {path} is not a trained run: {message}")]
    BadRunDir { path: PathBuf, message: String },
    #[error("training failed: {0}")]
    Train(#[from] lexaug_core::train::TrainError),
    #[error("baseline fit failed: {0}")]
    Baseline(#[from] lexaug_core::baselines::BaselineError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] lexaug_core::eval::EvalError),
    #[error("prediction failed: {0}")]
    Predict(#[from] lexaug_core::predict::PredictError),
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] lexaug_core::checkpoint::CheckpointError),
    #[error("definition fetching failed: {0}")]
    Defs(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    /// 2 for usage/input problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InputNotFound { .. }
            | CliError::ReadFailed { .. }
            | CliError::BadInput { .. }
            | CliError::BadConfig(_)
            | CliError::BadRunDir { .. } => 2,
            _ => 1,
        }
    }

    /// Machine-readable rendering for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.to_string(),
            "code": self.exit_code(),
        })
        .to_string()
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
