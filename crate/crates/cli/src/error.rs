use std::fmt::Display;

use serde_json::json;

/// Failure of one pipeline stage, reported as JSON on stderr.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(stage: &'static str, message: impl Display) -> Self {
        Self { stage, message: message.to_string() }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "stage": self.stage, "message": self.message } }).to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Tags an error with the stage it came from.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T, E: Display> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::new(stage, e))
    }
}
