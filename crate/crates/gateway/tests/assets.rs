use std::path::Path;

use rockcharge_gateway::config::{demo_scenario, DEMO_SCENARIO, DEMO_SCRIPT};
use rockcharge_gateway::Script;
use rockcharge_sim::Scenario;

fn expected_demo() -> Scenario {
    let mut s = Scenario::grid(4, 5, 42);
    s.fault_config.p_hole_not_found_at_approach = 0.0;
    s.fault_config.p_hose_blockage_per_hole = 0.0;
    s.fault_config.p_detonator_drop = 0.0;
    s
}

/// `ROCKCHARGE_BLESS=1` rewrites the asset.
#[test]
fn demo_scenario_asset_is_current() {
    let want = expected_demo().to_json();
    if std::env::var_os("ROCKCHARGE_BLESS").is_some() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/demo_scenario.json");
        std::fs::write(path, format!("{want}\n")).unwrap();
        return;
    }
    assert_eq!(DEMO_SCENARIO.trim(), want.trim(), "run with ROCKCHARGE_BLESS=1");
    let s = demo_scenario();
    assert_eq!(s.holes.len(), 20);
    assert_eq!(s.seed, 42);
    assert!(s.fault_config.scripted_faults.is_empty());
}

#[test]
fn demo_script_parses() {
    let script = Script::from_json(DEMO_SCRIPT).unwrap();
    assert_eq!(script.steps.len(), 5);
}
