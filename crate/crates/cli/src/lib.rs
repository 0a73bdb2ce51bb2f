//! Scenario runner and sweep driver for `tracemix`.
//!
//! Exit codes: 0 on completion, 2 on parse or validation failure, 3 when an
//! analysis fails or a sweep breaks a suite invariant, 1 on I/O errors.

pub mod run;
pub mod scenario;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("ValidationError: {0}")]
    Validation(String),
    #[error("AnalysisError: {0}")]
    Analysis(String),
    #[error("SuiteInvariantViolation: {} point(s) failed\n{}", .0.len(), .0.join("\n"))]
    SuiteInvariantViolation(Vec<String>),
    #[error("I/O error: {0}")]
    Io(String),
}

impl RunError {
    pub fn from_validation(e: tracemix::Error) -> RunError {
        RunError::Validation(format!("{}: {e}", e.kind()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) | RunError::Validation(_) => 2,
            RunError::Analysis(_) | RunError::SuiteInvariantViolation(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> RunError {
        RunError::Io(e.to_string())
    }
}
