use std::io;

use rockcharge_core::dsl::Diagnostic;
use rockcharge_fsm::FsmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("cannot listen on {addr}: {source}")]
    BindFailure { addr: String, source: io::Error },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("tree validation failed:\n{}", render(.0))]
    TreeValidationFailed(Vec<Diagnostic>),
    #[error("trees: {0}")]
    TreeLoad(String),
    #[error("snapshot `{0}` not found")]
    SnapshotNotFound(String),
    #[error("snapshot was taken under config {found}, current config is {expected}")]
    ConfigMismatch { expected: String, found: String },
    #[error("malformed snapshot `{path}`: {reason}")]
    MalformedSnapshot { path: String, reason: String },
    #[error("script: {0}")]
    Script(String),
    #[error(transparent)]
    Orchestrator(#[from] FsmError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn render(diagnostics: &[Diagnostic]) -> String {
    diagnostics.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl GatewayError {
    /// Process exit code: 2 for anything that stops startup, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            GatewayError::BindFailure { .. }
            | GatewayError::InvalidScenario(_)
            | GatewayError::TreeValidationFailed(_)
            | GatewayError::TreeLoad(_)
            | GatewayError::SnapshotNotFound(_)
            | GatewayError::ConfigMismatch { .. }
            | GatewayError::MalformedSnapshot { .. } => 2,
            _ => 3,
        }
    }
}
