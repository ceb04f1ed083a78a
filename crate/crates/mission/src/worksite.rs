use std::collections::BTreeMap;

use rockcharge_core::{Blackboard, Value};
use serde::{Deserialize, Serialize};

use crate::error::MissionError;
use crate::hole::{ChargeHole, HoleId, HoleState};
use crate::plan::{order_and_dose, plan_mission, ChargingMission, PlanParams};

/// Blackboard key holding the hole the charging manipulator works on.
pub const CURRENT_HOLE_KEY: &str = "current_hole";
/// Blackboard key holding the hole the explosives manipulator prepares for.
pub const NEXT_HOLE_KEY: &str = "next_hole";

/// Every hole known on the face plus the active mission, if any.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Worksite {
    pub holes: BTreeMap<HoleId, ChargeHole>,
    pub mission: Option<ChargingMission>,
    pub params: PlanParams,
    /// Set when detections or an operator request invalidate the plan.
    pub plan_dirty: bool,
}

impl Worksite {
    pub fn new(params: PlanParams) -> Self {
        Worksite {
            holes: BTreeMap::new(),
            mission: None,
            params,
            plan_dirty: true,
        }
    }

    pub fn hole(&self, id: &HoleId) -> Option<&ChargeHole> {
        self.holes.get(id)
    }

    pub fn hole_mut(&mut self, id: &HoleId) -> Result<&mut ChargeHole, MissionError> {
        self.holes.get_mut(id).ok_or_else(|| MissionError::UnknownHole(id.clone()))
    }

    pub fn set_state(&mut self, id: &HoleId, state: HoleState) -> Result<(), MissionError> {
        self.hole_mut(id)?.transition(state)
    }

    /// Fold a detection round into the hole set. New holes arrive as
    /// Detected; holes not yet being charged take the fresh pose estimate.
    /// Returns the number of new holes.
    pub fn merge_detections(&mut self, detected: impl IntoIterator<Item = ChargeHole>) -> usize {
        let mut added = 0;
        for h in detected {
            match self.holes.get_mut(&h.id) {
                Some(known) => {
                    if matches!(known.state, HoleState::Detected | HoleState::Planned) {
                        known.x = h.x;
                        known.y = h.y;
                    }
                }
                None => {
                    added += 1;
                    self.holes.insert(h.id.clone(), ChargeHole { state: HoleState::Detected, ..h });
                }
            }
        }
        self.plan_dirty = true;
        added
    }

    pub fn plan_is_current(&self) -> bool {
        self.mission.is_some() && !self.plan_dirty
    }

    pub fn mark_plan_dirty(&mut self) {
        self.plan_dirty = true;
    }

    /// First call plans all Detected holes. Later calls re-plan: a new
    /// revision queues every hole still Detected or Planned. Holes being
    /// charged, charged, failed or skipped are not queued.
    pub fn plan(&mut self) -> Result<&ChargingMission, MissionError> {
        let mission = match self.mission.take() {
            None => {
                let mut detected: Vec<ChargeHole> = self
                    .holes
                    .values()
                    .filter(|h| h.state == HoleState::Detected)
                    .cloned()
                    .collect();
                let m = plan_mission(&mut detected, &self.params)?;
                for h in detected {
                    self.holes.insert(h.id.clone(), h);
                }
                m
            }
            Some(mut prev) => {
                let mut candidates: Vec<&mut ChargeHole> = self
                    .holes
                    .values_mut()
                    .filter(|h| matches!(h.state, HoleState::Detected | HoleState::Planned))
                    .collect();
                match order_and_dose(&mut candidates, &self.params) {
                    Ok((queue, plan)) => {
                        prev.revision += 1;
                        prev.queue = queue;
                        prev.plan.extend(plan);
                        prev
                    }
                    Err(e) => {
                        self.mission = Some(prev);
                        return Err(e);
                    }
                }
            }
        };
        self.plan_dirty = false;
        Ok(self.mission.insert(mission))
    }

    pub fn peek_next(&self) -> Option<&ChargeHole> {
        let id = self.mission.as_ref()?.peek()?;
        self.holes.get(id)
    }

    /// Remove the queue head, mark it Charging and publish it on the
    /// blackboard under [`CURRENT_HOLE_KEY`].
    pub fn pop_next(&mut self, bb: &mut Blackboard) -> Result<ChargeHole, MissionError> {
        let mission = self.mission.as_mut().ok_or(MissionError::NoMission)?;
        let id = mission.queue.front().cloned().ok_or(MissionError::EmptyQueue)?;
        let hole = self.holes.get_mut(&id).ok_or_else(|| MissionError::UnknownHole(id.clone()))?;
        hole.transition(HoleState::Charging)?;
        mission.queue.pop_front();
        let _ = bb.set(CURRENT_HOLE_KEY, Value::Hole(hole.record()));
        Ok(hole.clone())
    }

    pub fn queue_len(&self) -> usize {
        self.mission.as_ref().map_or(0, ChargingMission::len)
    }

    /// The hole named by the blackboard's current-hole entry, if any.
    pub fn current_hole(&self, bb: &Blackboard) -> Option<&ChargeHole> {
        self.hole_on(bb, CURRENT_HOLE_KEY)
    }

    pub fn hole_on(&self, bb: &Blackboard, key: &str) -> Option<&ChargeHole> {
        match bb.peek(key) {
            Some(Value::Hole(rec)) => self.holes.get(&HoleId::new(rec.id.clone())),
            _ => None,
        }
    }

    /// Shift a hole's pose estimate, as an operator teleoperation would.
    pub fn nudge(&mut self, id: &HoleId, dx: f64, dy: f64) -> Result<(), MissionError> {
        let h = self.hole_mut(id)?;
        h.x += dx;
        h.y += dy;
        Ok(())
    }

    pub fn count(&self, state: HoleState) -> usize {
        self.holes.values().filter(|h| h.state == state).count()
    }

    /// True when every planned hole has reached Charged or Skipped.
    pub fn all_done(&self) -> bool {
        self.queue_len() == 0 && self.holes.values().all(|h| h.state.is_final() || h.state == HoleState::Detected)
    }
}
