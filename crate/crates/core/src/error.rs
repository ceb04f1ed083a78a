use thiserror::Error;

use crate::tree::NodeId;

/// Engine-level errors. Leaf failures are [`crate::Status::Failure`], not errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BtError {
    #[error("node `{node_id}` references unregistered behavior `{behavior}`")]
    UnregisteredBehavior { node_id: NodeId, behavior: String },
    #[error("behavior `{behavior}` at node `{node_id}` is registered as {registered}, tree expects {expected}")]
    BehaviorKindMismatch {
        node_id: NodeId,
        behavior: String,
        registered: &'static str,
        expected: &'static str,
    },
    #[error("condition `{node_id}` returned Running")]
    ConditionReturnedRunning { node_id: NodeId },
    #[error("malformed tree at `{node_id}`: {reason}")]
    MalformedTree { node_id: NodeId, reason: String },
    #[error("runtime was created for a different tree")]
    RuntimeMismatch,
    #[error("unknown node id `{0}`")]
    UnknownNodeId(NodeId),
    #[error("behavior `{0}` is already registered")]
    DuplicateName(String),
}
