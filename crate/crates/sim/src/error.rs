use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("snapshot version {found} is not supported (expected {expected})")]
    IncompatibleSnapshotVersion { found: u32, expected: u32 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),
}
