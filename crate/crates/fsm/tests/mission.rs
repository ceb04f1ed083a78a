mod common;

use common::*;
use rockcharge_fsm::{Notice, Phase, StepResult};
use rockcharge_mission::HoleState;
use rockcharge_sim::Scenario;

#[test]
fn zero_fault_mission_runs_through_every_phase() {
    let mut o = orchestrator(&Scenario::grid(4, 5, 42));
    start_charging(&mut o);
    charge(&mut o);
    assert_eq!(o.phase(), Phase::MissionComplete);
    assert_eq!(o.rig().site.count(HoleState::Charged), 20);
    let phases: Vec<(Phase, Phase)> = o
        .drain_notices()
        .into_iter()
        .filter_map(|n| match n {
            Notice::PhaseChanged { from, to } => Some((from, to)),
            _ => None,
        })
        .collect();
    use Phase::*;
    assert_eq!(
        phases,
        [
            (Idle, PreScan),
            (PreScan, DetectHoles),
            (DetectHoles, ChargePlan),
            (ChargePlan, Charging),
            (Charging, MissionComplete)
        ]
    );
    assert_eq!(o.step().unwrap(), StepResult::Waiting);
    assert!(o.running_nodes().is_empty());
}

#[test]
fn plan_waits_for_the_operator() {
    let mut o = orchestrator(&Scenario::grid(1, 3, 42));
    o.handle_event(rockcharge_fsm::Event::StartMission).unwrap();
    step_until(&mut o, 2000, plan_ready);
    for _ in 0..50 {
        assert_eq!(o.step().unwrap(), StepResult::Waiting);
    }
    assert_eq!(o.phase(), Phase::ChargePlan);
    assert_eq!(o.rig().site.count(HoleState::Planned), 3);
}

#[test]
fn hole_and_mission_updates_are_published() {
    let mut o = orchestrator(&Scenario::grid(1, 2, 42));
    start_charging(&mut o);
    charge(&mut o);
    let notices = o.drain_notices();
    let charged: Vec<String> = notices
        .iter()
        .filter_map(|n| match n {
            Notice::HoleUpdated { hole } if hole.state == HoleState::Charged => Some(hole.id.to_string()),
            _ => None,
        })
        .collect();
    let planned: Vec<String> = notices
        .iter()
        .find_map(|n| match n {
            Notice::MissionUpdated { mission: Some(m) } => Some(m.queue.iter().map(|h| h.to_string()).collect()),
            _ => None,
        })
        .expect("plan published");
    assert_eq!(planned.len(), 2);
    assert_eq!(charged, planned, "holes are charged in plan order");
    assert!(notices.iter().any(|n| matches!(n, Notice::TickTrace { phase: Phase::Charging, .. })));
}

#[test]
fn replan_from_charging_keeps_finished_holes() {
    let mut o = orchestrator(&Scenario::grid(1, 4, 42));
    start_charging(&mut o);
    step_until(&mut o, 20_000, |o| o.rig().site.count(HoleState::Charged) == 2);
    o.handle_event(rockcharge_fsm::Event::RePlan).unwrap();
    assert!(o.rig().world.is_idle(), "leaving Charging halts every activity");
    step_until(&mut o, 2000, plan_ready);
    let mission = o.rig().site.mission.clone().unwrap();
    assert_eq!(mission.revision, 2);
    assert!(mission.queue.len() <= 2);
    o.handle_event(rockcharge_fsm::Event::StartCharging).unwrap();
    charge(&mut o);
    assert_eq!(o.rig().site.count(HoleState::Charged), 4);
}
