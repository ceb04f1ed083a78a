use std::collections::BTreeMap;

use rockcharge_core::{Blackboard, Value};
use rockcharge_mission::trees::{GIVE_READY_KEY, TAKE_READY_KEY};
use rockcharge_mission::{ChargeHole, HoleId, HoleState, MissionError, Worksite};
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::world::{hash_json, SimWorld};

/// Leaf context: the simulated rig plus the mission state it works on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rig {
    pub world: SimWorld,
    pub site: Worksite,
}

/// What a mission achieved, independent of how long it took.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub holes: BTreeMap<String, HoleState>,
    pub pumped_g: BTreeMap<String, u64>,
    pub pump_completions: BTreeMap<String, u32>,
    pub detonators_used: u32,
    pub detonators_dropped: u32,
}

impl Rig {
    pub fn new(scenario: &Scenario, site: Worksite) -> Rig {
        Rig { world: SimWorld::new(scenario), site }
    }

    /// Called whenever a phase tree is (re)started from a fresh runtime:
    /// nothing is in progress any more.
    pub fn restart(&mut self, bb: &mut Blackboard) {
        self.world.abort_all();
        for key in [GIVE_READY_KEY, TAKE_READY_KEY] {
            if bb.contains(key) || bb.schema().contains_key(key) {
                let _ = bb.set(key, Value::Flag(false));
            }
        }
    }

    /// Operator teleoperation: shift the pose estimate of `hole`.
    pub fn teleop_nudge(&mut self, hole: &HoleId, dx: f64, dy: f64) -> Result<(), MissionError> {
        self.site.nudge(hole, dx, dy)?;
        self.world.lost.remove(hole.as_str());
        Ok(())
    }

    /// Ground-truth distance between a hole's estimate and its true position.
    pub fn estimate_error(&self, hole: &ChargeHole) -> Option<f64> {
        let t = self.world.truth.get(hole.id.as_str())?;
        Some(((hole.x - t.x).powi(2) + (hole.y - t.y).powi(2)).sqrt())
    }

    pub fn outcome(&self) -> Outcome {
        Outcome {
            holes: self.site.holes.iter().map(|(k, h)| (k.to_string(), h.state)).collect(),
            pumped_g: self.world.pumped_g.clone(),
            pump_completions: self.world.pump_completions.clone(),
            detonators_used: self.world.detonators_used,
            detonators_dropped: self.world.detonators_dropped,
        }
    }

    /// Grams each Charged hole should have received.
    pub fn target_g(hole: &ChargeHole) -> u64 {
        (hole.emulsion_target * 1000.0).round() as u64
    }

    pub fn state_hash(&self) -> String {
        hash_json(self)
    }
}
