#![allow(dead_code)]

use rockcharge_fsm::{Event, Orchestrator, Phase};
use rockcharge_mission::trees::build_mission_trees;
use rockcharge_mission::{PlanParams, Worksite};
use rockcharge_sim::{registry, FaultKind, Rig, Scenario, ScriptedFault, Trigger};

pub fn orchestrator(scenario: &Scenario) -> Orchestrator {
    let rig = Rig::new(scenario, Worksite::new(PlanParams::default()));
    Orchestrator::new(build_mission_trees(), registry(), rig).unwrap()
}

pub fn fault(hole: &str, kind: FaultKind) -> ScriptedFault {
    ScriptedFault { trigger: Trigger::Hole(hole.into()), kind }
}

/// Step until `done` holds or a prompt appears; panics after `max` steps.
pub fn step_until(o: &mut Orchestrator, max: usize, done: impl Fn(&Orchestrator) -> bool) {
    for _ in 0..max {
        if done(o) || o.prompt().is_some() {
            return;
        }
        o.step().unwrap();
    }
    panic!("no progress after {max} steps in {:?}", o.phase());
}

pub fn plan_ready(o: &Orchestrator) -> bool {
    o.phase() == Phase::ChargePlan && o.state().tree_finished
}

/// Start a mission and run it up to an approved plan, then start charging.
pub fn start_charging(o: &mut Orchestrator) {
    o.handle_event(Event::StartMission).unwrap();
    step_until(o, 2000, plan_ready);
    assert!(o.prompt().is_none(), "{:?}", o.prompt());
    o.handle_event(Event::StartCharging).unwrap();
}

pub fn charge(o: &mut Orchestrator) {
    step_until(o, 20_000, |o| o.phase() == Phase::MissionComplete);
}
