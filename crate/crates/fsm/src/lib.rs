//! Mission phases. Each active phase runs one behavior tree; the tree's
//! result drives the next transition, failures wait for an operator.

mod error;
mod orchestrator;
mod phase;
mod prompt;

pub use error::FsmError;
pub use orchestrator::{Notice, Orchestrator, OrchestratorState, StepResult};
pub use phase::{Event, Origin, Phase, Resolution, ResolutionKind, TransitionTable};
pub use prompt::{locate_failure, AssistancePrompt, FailurePoint};
