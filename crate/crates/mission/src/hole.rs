use std::fmt;

use rockcharge_core::HoleRecord;
use serde::{Deserialize, Serialize};

use crate::error::MissionError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoleId(String);

impl HoleId {
    pub fn new(id: impl Into<String>) -> Self {
        HoleId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for HoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for HoleId {
    fn from(s: &str) -> Self {
        HoleId(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HoleState {
    Detected,
    Planned,
    Charging,
    Charged,
    Failed,
    Skipped,
}

impl HoleState {
    pub fn can_become(self, next: HoleState) -> bool {
        use HoleState::*;
        matches!(
            (self, next),
            (Detected, Planned)
                | (Planned, Charging)
                | (Charging, Charged)
                | (Charging, Failed)
                | (Failed, Skipped)
                | (Failed, Charging)
        )
    }

    /// No further work will happen on this hole.
    pub fn is_final(self) -> bool {
        matches!(self, HoleState::Charged | HoleState::Skipped)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeHole {
    pub id: HoleId,
    /// Position on the rock face in meters, as currently estimated.
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub collar_direction: [f64; 3],
    pub state: HoleState,
    /// kg of emulsion; zero until planned.
    pub emulsion_target: f64,
    pub detonator_type: String,
}

impl ChargeHole {
    pub fn detected(id: impl Into<String>, x: f64, y: f64, depth: f64) -> Self {
        ChargeHole {
            id: HoleId::new(id),
            x,
            y,
            depth,
            collar_direction: [0.0, 0.0, 1.0],
            state: HoleState::Detected,
            emulsion_target: 0.0,
            detonator_type: String::new(),
        }
    }

    pub fn transition(&mut self, next: HoleState) -> Result<(), MissionError> {
        if !self.state.can_become(next) {
            return Err(MissionError::IllegalTransition {
                hole: self.id.clone(),
                from: self.state,
                to: next,
            });
        }
        self.state = next;
        Ok(())
    }

    pub fn record(&self) -> HoleRecord {
        HoleRecord {
            id: self.id.to_string(),
            x: self.x,
            y: self.y,
            depth: self.depth,
            emulsion_target: self.emulsion_target,
            detonator_type: self.detonator_type.clone(),
        }
    }
}
