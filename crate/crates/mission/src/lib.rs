//! Mission data model: drilled holes and their lifecycle, the charging
//! plan and its queue, and the behavior trees run for each phase.

mod error;
mod file;
mod hole;
mod plan;
pub mod trees;

mod worksite;

pub use error::MissionError;
pub use file::{MissionFile, MissionFileHole};
pub use hole::{ChargeHole, HoleId, HoleState};
pub use plan::{plan_mission, ChargingMission, HolePlan, OrderRule, PlanParams, MAX_HOLES};
pub use worksite::{Worksite, CURRENT_HOLE_KEY, NEXT_HOLE_KEY};
