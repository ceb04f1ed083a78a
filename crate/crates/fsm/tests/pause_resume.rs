mod common;

use common::*;
use proptest::prelude::*;
use rockcharge_fsm::{Orchestrator, Phase};
use rockcharge_sim::{Outcome, Scenario};

fn faulty(seed: u64) -> Scenario {
    let mut s = Scenario::grid(2, 4, seed);
    s.fault_config.p_hole_not_found_at_approach = 0.3;
    s.fault_config.p_hose_blockage_per_hole = 0.3;
    s
}

fn run(scenario: &Scenario, pauses: &[(u64, u64)]) -> (Outcome, u64) {
    let mut o = common::orchestrator(scenario);
    o.handle_event(rockcharge_fsm::Event::StartMission).unwrap();
    let mut pauses = pauses.iter().copied().peekable();
    let mut waited = 0;
    for _ in 0..50_000 {
        if o.phase() == Phase::MissionComplete {
            break;
        }
        assert!(o.prompt().is_none(), "{:?}", o.prompt());
        if plan_ready(&o) {
            o.handle_event(rockcharge_fsm::Event::StartCharging).unwrap();
        }
        if let Some(&(at, hold)) = pauses.peek() {
            if o.ticks() >= at && o.pause().is_ok() {
                pauses.next();
                for _ in 0..hold {
                    o.step().unwrap();
                    waited += 1;
                }
                o.resume().unwrap();
            }
        }
        o.step().unwrap();
    }
    assert_eq!(o.phase(), Phase::MissionComplete);
    (o.rig().outcome(), waited)
}

fn digest(o: &Orchestrator) -> Outcome {
    o.rig().outcome()
}

#[test]
fn ten_pauses_do_not_change_the_outcome() {
    let scenario = Scenario::grid(4, 5, 42);
    let (plain, _) = run(&scenario, &[]);
    let pauses: Vec<(u64, u64)> = (1..=10).map(|k| (k * 97 + 13, k % 4)).collect();
    let (paused, waited) = run(&scenario, &pauses);
    assert!(waited > 0);
    assert_eq!(plain, paused);
}

#[test]
fn paused_world_does_not_advance() {
    let mut o = orchestrator(&Scenario::grid(1, 2, 42));
    start_charging(&mut o);
    for _ in 0..30 {
        o.step().unwrap();
    }
    o.pause().unwrap();
    assert!(o.running_nodes().is_empty());
    assert!(o.rig().world.is_idle());
    let before = (o.rig().world.sim_time, digest(&o));
    for _ in 0..20 {
        o.step().unwrap();
    }
    assert_eq!((o.rig().world.sim_time, digest(&o)), before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pause_points_never_matter(seed in 0u64..1000, raw in proptest::collection::vec((0u64..900, 0u64..5), 1..10)) {
        let mut pauses = raw;
        pauses.sort();
        let scenario = faulty(seed);
        let (plain, _) = run(&scenario, &[]);
        let (paused, _) = run(&scenario, &pauses);
        prop_assert_eq!(plain, paused);
    }
}
