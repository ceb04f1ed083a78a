mod common;

use rockcharge_fsm::{Event, FsmError, Origin, Phase, TransitionTable};
use rockcharge_sim::Scenario;

/// Independent statement of the phase graph.
fn expected(from: Phase, event: Event) -> Option<Phase> {
    use Phase::*;
    match (from, event) {
        (Idle, Event::StartMission) => Some(PreScan),
        (PreScan, Event::ScanComplete) => Some(DetectHoles),
        (DetectHoles, Event::NewHolesDetected) => Some(ChargePlan),
        (ChargePlan, Event::StartCharging) => Some(Charging),
        (ChargePlan, Event::ScanAgain) => Some(DetectHoles),
        (Charging, Event::RePlan) => Some(ChargePlan),
        (Charging, Event::ChargingComplete) => Some(MissionComplete),
        _ => None,
    }
}

#[test]
fn table_has_exactly_seven_edges() {
    assert_eq!(TransitionTable::ENTRIES.len(), 7);
    let mut accepted = 0;
    for from in Phase::ALL {
        for event in Event::samples() {
            assert_eq!(TransitionTable::next(from, event), expected(from, event), "{from:?} x {event:?}");
            accepted += usize::from(expected(from, event).is_some());
        }
    }
    assert_eq!(accepted, 7);
}

#[test]
fn orchestrator_accepts_exactly_the_table() {
    let scenario = Scenario::grid(1, 2, 1);
    for from in Phase::ALL {
        for event in Event::samples() {
            let base = common::orchestrator(&scenario);
            let mut state = base.state().clone();
            state.phase = from;
            let mut o = rockcharge_fsm::Orchestrator::from_state(
                base.document().clone(),
                rockcharge_sim::registry(),
                state,
            )
            .unwrap();
            match (o.handle_event(event), expected(from, event)) {
                (Ok(to), Some(want)) => {
                    assert_eq!(to, want);
                    assert_eq!(o.phase(), want);
                }
                (Err(FsmError::RejectedEvent { phase, .. }), None) => {
                    assert_eq!(phase, from);
                    assert_eq!(o.phase(), from, "a rejected event leaves the phase alone");
                }
                (got, want) => panic!("{from:?} x {event:?}: got {got:?}, want {want:?}"),
            }
        }
    }
}

#[test]
fn tree_events_come_from_tree_results() {
    for event in Event::samples() {
        let from_tree = matches!(event, Event::ScanComplete | Event::NewHolesDetected | Event::ChargingComplete);
        assert_eq!(event.origin() == Origin::Tree, from_tree, "{event:?}");
    }
    assert_eq!(TransitionTable::on_success(Phase::PreScan), Some(Event::ScanComplete));
    assert_eq!(TransitionTable::on_success(Phase::DetectHoles), Some(Event::NewHolesDetected));
    assert_eq!(TransitionTable::on_success(Phase::ChargePlan), None);
    assert_eq!(TransitionTable::on_success(Phase::Charging), Some(Event::ChargingComplete));
}

#[test]
fn rest_phases_cannot_pause() {
    let mut o = common::orchestrator(&Scenario::grid(1, 2, 1));
    assert_eq!(o.pause(), Err(FsmError::NotRunning));
    assert_eq!(o.resume(), Err(FsmError::NotPaused));
    o.handle_event(Event::StartMission).unwrap();
    o.pause().unwrap();
    assert_eq!(o.pause(), Err(FsmError::AlreadyPaused));
    o.resume().unwrap();
    assert_eq!(o.resume(), Err(FsmError::NotPaused));
}
