use serde::{Deserialize, Serialize};

use crate::error::MissionError;
use crate::hole::{ChargeHole, HoleId, HoleState};
use crate::plan::{ChargingMission, HolePlan};
use crate::worksite::Worksite;

/// On-disk mission document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionFile {
    pub mission_id: String,
    pub revision: u32,
    pub holes: Vec<MissionFileHole>,
    pub order: Vec<HoleId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionFileHole {
    pub id: HoleId,
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub emulsion_target: f64,
    pub detonator_type: String,
}

impl MissionFile {
    /// Export the active mission; holes are listed in id order.
    pub fn from_worksite(site: &Worksite) -> Option<MissionFile> {
        let m = site.mission.as_ref()?;
        let holes = m
            .plan
            .keys()
            .filter_map(|id| site.hole(id))
            .map(|h| MissionFileHole {
                id: h.id.clone(),
                x: h.x,
                y: h.y,
                depth: h.depth,
                emulsion_target: h.emulsion_target,
                detonator_type: h.detonator_type.clone(),
            })
            .collect();
        Some(MissionFile {
            mission_id: m.mission_id.clone(),
            revision: m.revision,
            holes,
            order: m.queue.iter().cloned().collect(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mission file serializes")
    }

    pub fn from_json(text: &str) -> Result<MissionFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Install this mission on a worksite as an operator-supplied plan.
    /// Listed holes become Planned; `order` must only name listed holes.
    pub fn install(&self, site: &mut Worksite, created_by: &str) -> Result<(), MissionError> {
        let listed: std::collections::BTreeSet<&HoleId> = self.holes.iter().map(|h| &h.id).collect();
        if listed.len() != self.holes.len() {
            return Err(MissionError::InvalidOrder);
        }
        if let Some(bad) = self.order.iter().find(|id| !listed.contains(id)) {
            return Err(MissionError::UnknownHole(bad.clone()));
        }
        for h in &self.holes {
            site.holes.insert(
                h.id.clone(),
                ChargeHole {
                    id: h.id.clone(),
                    x: h.x,
                    y: h.y,
                    depth: h.depth,
                    collar_direction: [0.0, 0.0, 1.0],
                    state: HoleState::Planned,
                    emulsion_target: h.emulsion_target,
                    detonator_type: h.detonator_type.clone(),
                },
            );
        }
        site.mission = Some(ChargingMission {
            mission_id: self.mission_id.clone(),
            revision: self.revision,
            created_by: created_by.to_string(),
            queue: self.order.iter().cloned().collect(),
            plan: self
                .holes
                .iter()
                .map(|h| {
                    (
                        h.id.clone(),
                        HolePlan { emulsion_target: h.emulsion_target, detonator_type: h.detonator_type.clone() },
                    )
                })
                .collect(),
        });
        site.plan_dirty = false;
        Ok(())
    }
}
