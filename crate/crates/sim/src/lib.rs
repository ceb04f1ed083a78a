//! Deterministic simulation of the charging rig: the rock face with its
//! true holes, boom, both manipulators, hose, pump and detonator magazine,
//! with seeded and scripted fault injection. Every mission leaf behavior is
//! implemented here against that model.

mod config;
mod error;
mod leaves;
mod rig;
mod rng;
mod world;

pub use config::{Face, FaultConfig, FaultKind, Scenario, ScenarioHole, ScriptedFault, SimConfig, Trigger};
pub use error::SimError;
pub use leaves::{register_leaves, registry};
pub use rig::{Outcome, Rig};
pub use rng::{Channel, KeyedRng};
pub use world::{Activity, Actor, Blockage, Hose, Secondary, SimSnapshot, SimWorld, Task, TrueHole, SNAPSHOT_VERSION};
