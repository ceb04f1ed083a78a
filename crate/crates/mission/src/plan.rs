use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::MissionError;
use crate::hole::{ChargeHole, HoleId, HoleState};

/// A mission covers at most this many holes.
pub const MAX_HOLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrderRule {
    /// Bottom row first (ascending y), then ascending x, then id.
    BottomUp,
    /// Operator-supplied order; must name exactly the holes being planned.
    Explicit(Vec<HoleId>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub mission_id: String,
    pub created_by: String,
    /// kg of emulsion per meter of hole depth.
    pub linear_density: f64,
    pub detonator_type: String,
    pub order: OrderRule,
}

impl Default for PlanParams {
    fn default() -> Self {
        PlanParams {
            mission_id: "mission-1".into(),
            created_by: "operator".into(),
            linear_density: 1.0,
            detonator_type: "nonel-500ms".into(),
            order: OrderRule::BottomUp,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolePlan {
    pub emulsion_target: f64,
    pub detonator_type: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargingMission {
    pub mission_id: String,
    pub revision: u32,
    pub created_by: String,
    pub queue: VecDeque<HoleId>,
    pub plan: BTreeMap<HoleId, HolePlan>,
}

impl ChargingMission {
    pub fn peek(&self) -> Option<&HoleId> {
        self.queue.front()
    }

    pub fn contains(&self, id: &HoleId) -> bool {
        self.queue.contains(id)
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

pub(crate) fn bottom_up(a: &ChargeHole, b: &ChargeHole) -> Ordering {
    a.y.total_cmp(&b.y)
        .then(a.x.total_cmp(&b.x))
        .then_with(|| a.id.cmp(&b.id))
}

/// Order `holes` and compute per-hole dosing. Holes are updated in place
/// (state Planned, emulsion target and detonator type filled in).
pub(crate) fn order_and_dose(
    holes: &mut [&mut ChargeHole],
    params: &PlanParams,
) -> Result<(VecDeque<HoleId>, BTreeMap<HoleId, HolePlan>), MissionError> {
    if holes.len() > MAX_HOLES {
        return Err(MissionError::TooManyHoles { count: holes.len(), max: MAX_HOLES });
    }
    let mut seen = BTreeSet::new();
    for h in holes.iter() {
        if !seen.insert(h.id.clone()) {
            return Err(MissionError::DuplicateHole(h.id.clone()));
        }
        if !(h.depth > 0.0) {
            return Err(MissionError::InvalidDepth(h.id.clone()));
        }
    }
    let order: Vec<HoleId> = match &params.order {
        OrderRule::BottomUp => {
            let mut sorted: Vec<&ChargeHole> = holes.iter().map(|h| &**h).collect();
            sorted.sort_by(|a, b| bottom_up(a, b));
            sorted.into_iter().map(|h| h.id.clone()).collect()
        }
        OrderRule::Explicit(ids) => {
            let given: BTreeSet<&HoleId> = ids.iter().collect();
            if given.len() != ids.len() || given != seen.iter().collect() {
                return Err(MissionError::InvalidOrder);
            }
            ids.clone()
        }
    };
    let mut plan = BTreeMap::new();
    for h in holes.iter_mut() {
        if h.state != HoleState::Planned {
            h.transition(HoleState::Planned)?;
        }
        h.emulsion_target = params.linear_density * h.depth;
        h.detonator_type = params.detonator_type.clone();
        plan.insert(
            h.id.clone(),
            HolePlan {
                emulsion_target: h.emulsion_target,
                detonator_type: h.detonator_type.clone(),
            },
        );
    }
    Ok((order.into(), plan))
}

/// Build the first revision of a mission from freshly detected holes.
pub fn plan_mission(holes: &mut [ChargeHole], params: &PlanParams) -> Result<ChargingMission, MissionError> {
    if holes.is_empty() {
        return Err(MissionError::EmptyHoleSet);
    }
    if let Some(h) = holes.iter().find(|h| h.state != HoleState::Detected) {
        return Err(MissionError::NotDetected { hole: h.id.clone(), state: h.state });
    }
    let mut refs: Vec<&mut ChargeHole> = holes.iter_mut().collect();
    let (queue, plan) = order_and_dose(&mut refs, params)?;
    Ok(ChargingMission {
        mission_id: params.mission_id.clone(),
        revision: 1,
        created_by: params.created_by.clone(),
        queue,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn holes(pts: &[(f64, f64)]) -> Vec<ChargeHole> {
        pts.iter()
            .enumerate()
            .map(|(i, &(x, y))| ChargeHole::detected(format!("H{}", i + 1), x, y, 3.0))
            .collect()
    }

    #[test]
    fn bottom_row_first_then_left_to_right() {
        let mut hs = holes(&[(1.0, 2.0), (0.0, 1.0), (2.0, 1.0)]);
        let m = plan_mission(&mut hs, &PlanParams::default()).unwrap();
        let order: Vec<_> = m.queue.iter().map(|h| h.as_str()).collect();
        assert_eq!(order, ["H2", "H3", "H1"]);
        assert!(hs.iter().all(|h| h.state == HoleState::Planned));
        assert_eq!(m.plan[&HoleId::from("H1")].emulsion_target, 3.0);
    }

    #[test]
    fn ties_broken_by_id() {
        let mut hs = vec![
            ChargeHole::detected("B", 0.0, 0.0, 1.0),
            ChargeHole::detected("A", 0.0, 0.0, 1.0),
        ];
        let m = plan_mission(&mut hs, &PlanParams::default()).unwrap();
        assert_eq!(m.queue, [HoleId::from("A"), HoleId::from("B")]);
    }

    #[test]
    fn empty_and_oversized() {
        assert_eq!(plan_mission(&mut [], &PlanParams::default()), Err(MissionError::EmptyHoleSet));
        let mut many: Vec<_> = (0..101).map(|i| ChargeHole::detected(format!("H{i}"), 0.0, i as f64, 2.0)).collect();
        assert_eq!(
            plan_mission(&mut many, &PlanParams::default()),
            Err(MissionError::TooManyHoles { count: 101, max: 100 })
        );
        assert!(many.iter().all(|h| h.state == HoleState::Detected));
    }

    #[test]
    fn explicit_order_must_be_a_permutation() {
        let mut hs = holes(&[(0.0, 0.0), (1.0, 0.0)]);
        let mut params = PlanParams { order: OrderRule::Explicit(vec!["H2".into(), "H1".into()]), ..Default::default() };
        let m = plan_mission(&mut hs.clone(), &params).unwrap();
        assert_eq!(m.queue, [HoleId::from("H2"), HoleId::from("H1")]);
        params.order = OrderRule::Explicit(vec!["H2".into()]);
        assert_eq!(plan_mission(&mut hs, &params), Err(MissionError::InvalidOrder));
    }
}
