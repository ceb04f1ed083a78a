use rockcharge_core::BtError;
use rockcharge_mission::MissionError;
use thiserror::Error;

use crate::phase::{Event, Phase, ResolutionKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FsmError {
    #[error("event {event:?} is not accepted in phase {phase}")]
    RejectedEvent { phase: Phase, event: Event },
    #[error("an assistance prompt is waiting for a resolution")]
    PromptPending,
    #[error("not paused")]
    NotPaused,
    #[error("no phase tree is active")]
    NotRunning,
    #[error("a phase tree is running; pause first")]
    TreeActive,
    #[error("already paused")]
    AlreadyPaused,
    #[error("no assistance prompt is active")]
    NoActivePrompt,
    #[error("resolution {resolution:?} is not offered in phase {phase}")]
    InvalidResolutionForPhase { phase: Phase, resolution: ResolutionKind },
    #[error("tree `{0}` is missing from the tree document")]
    MissingTree(String),
    #[error(transparent)]
    Engine(#[from] BtError),
    #[error(transparent)]
    Mission(#[from] MissionError),
}
