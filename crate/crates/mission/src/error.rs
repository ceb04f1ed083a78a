use thiserror::Error;

use crate::hole::{HoleId, HoleState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("no holes to plan")]
    EmptyHoleSet,
    #[error("{count} holes exceed the mission capacity of {max}")]
    TooManyHoles { count: usize, max: usize },
    #[error("mission queue is empty")]
    EmptyQueue,
    #[error("no mission has been planned")]
    NoMission,
    #[error("unknown hole `{0}`")]
    UnknownHole(HoleId),
    #[error("hole `{0}` listed twice")]
    DuplicateHole(HoleId),
    #[error("hole `{hole}` cannot go from {from:?} to {to:?}")]
    IllegalTransition {
        hole: HoleId,
        from: HoleState,
        to: HoleState,
    },
    #[error("hole `{hole}` is {state:?}; planning needs Detected holes")]
    NotDetected { hole: HoleId, state: HoleState },
    #[error("explicit order must list exactly the holes being planned")]
    InvalidOrder,
    #[error("hole `{0}` has non-positive depth")]
    InvalidDepth(HoleId),
}
