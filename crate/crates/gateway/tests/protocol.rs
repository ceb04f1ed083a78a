mod common;

use std::path::Path;

use rockcharge_fsm::{Phase, ResolutionKind};
use rockcharge_gateway::protocol::ResolutionArgs;
use rockcharge_gateway::{Command, CommandKind, EventBody, EventMsg};
use rockcharge_mission::HoleId;
use serde_json::{json, Value};

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/protocol").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn type_ok(ty: &str, v: &Value) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        other => panic!("schema uses unsupported type {other}"),
    }
}

/// Checks the keyword subset the published schemas use.
fn check(s: &Value, v: &Value, at: &str) -> Result<(), String> {
    let fail = |what: String| Err(format!("{at}: {what}"));
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_ok(t, v),
            Value::Array(ts) => ts.iter().any(|t| type_ok(t.as_str().unwrap(), v)),
            _ => unreachable!(),
        };
        if !ok {
            return fail(format!("{v} is not {t}"));
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            return fail(format!("{v} != {c}"));
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            return fail(format!("{v} not in {options:?}"));
        }
    }
    if let (Some(Value::Object(props)), Value::Object(obj)) = (s.get("properties"), v) {
        for (k, sub) in props {
            if let Some(x) = obj.get(k) {
                check(sub, x, &format!("{at}.{k}"))?;
            }
        }
        if s.get("additionalProperties") == Some(&Value::Bool(false)) {
            if let Some(extra) = obj.keys().find(|k| !props.contains_key(*k)) {
                return fail(format!("unexpected property {extra}"));
            }
        }
    }
    if let (Some(Value::Array(req)), Value::Object(obj)) = (s.get("required"), v) {
        for r in req {
            if !obj.contains_key(r.as_str().unwrap()) {
                return fail(format!("missing {r}"));
            }
        }
    }
    if let (Some(items), Value::Array(xs)) = (s.get("items"), v) {
        for (i, x) in xs.iter().enumerate() {
            check(items, x, &format!("{at}[{i}]"))?;
        }
    }
    if let (Some(Value::Array(prefix)), Value::Array(xs)) = (s.get("prefixItems"), v) {
        for (i, (sub, x)) in prefix.iter().zip(xs).enumerate() {
            check(sub, x, &format!("{at}[{i}]"))?;
        }
    }
    if let Some(Value::Array(branches)) = s.get("oneOf") {
        let matching = branches.iter().filter(|b| check(b, v, at).is_ok()).count();
        if matching != 1 {
            return fail(format!("{matching} oneOf branches match"));
        }
    }
    Ok(())
}

fn kinds(schema: &Value) -> Vec<String> {
    schema["oneOf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["properties"]["kind"]["const"].as_str().unwrap().to_string())
        .collect()
}

fn all_commands() -> Vec<CommandKind> {
    vec![
        CommandKind::StartMission { scenario_ref: None },
        CommandKind::StartMission { scenario_ref: Some("face.json".into()) },
        CommandKind::StartCharging,
        CommandKind::RePlan,
        CommandKind::ScanAgain,
        CommandKind::Pause,
        CommandKind::Resume,
        CommandKind::EStop,
        CommandKind::ResolveAssistance { resolution: ResolutionKind::SkipHole, args: None },
        CommandKind::ResolveAssistance {
            resolution: ResolutionKind::TeleopNudge,
            args: Some(ResolutionArgs { dx: 0.02, dy: 0.0 }),
        },
        CommandKind::TeleopNudge { hole_id: HoleId::from("H05"), dx: 0.02, dy: 0.0 },
        CommandKind::LoadSnapshot { snapshot_ref: "latest".into() },
        CommandKind::Shutdown,
    ]
}

#[test]
fn commands_match_their_schema_and_round_trip() {
    let s = schema("command.schema.json");
    let mut seen = Vec::new();
    for (n, kind) in all_commands().into_iter().enumerate() {
        let cmd = common::cmd(&format!("c{n}"), kind);
        let v = serde_json::to_value(&cmd).unwrap();
        check(&s, &v, "command").unwrap_or_else(|e| panic!("{e}\n{v}"));
        assert_eq!(serde_json::from_value::<Command>(v.clone()).unwrap(), cmd);
        seen.push(v["kind"].as_str().unwrap().to_string());
    }
    seen.dedup();
    assert_eq!(seen, kinds(&s));
}

#[test]
fn nudge_command_has_the_documented_shape() {
    let cmd: Command = serde_json::from_value(json!({
        "command_id": "ui-17", "issued_by": "op1", "kind": "TeleopNudge", "hole_id": "H05", "dx": 0.02, "dy": 0.0
    }))
    .unwrap();
    assert_eq!(cmd.kind, CommandKind::TeleopNudge { hole_id: HoleId::from("H05"), dx: 0.02, dy: 0.0 });
    let bad = json!({"command_id": "x", "kind": "Launch"});
    assert!(serde_json::from_value::<Command>(bad.clone()).is_err());
    assert!(check(&schema("command.schema.json"), &bad, "command").is_err());
}

/// Every event kind, taken from a real session where possible.
#[test]
fn events_match_their_schema_and_round_trip() {
    use rockcharge_sim::{FaultKind, Scenario, ScriptedFault, Trigger};
    let mut scenario = Scenario::grid(1, 2, 3);
    scenario.fault_config.scripted_faults = vec![ScriptedFault {
        trigger: Trigger::Hole("H02".into()),
        kind: FaultKind::HoseBlockage { at_depth: 1.0, persistent: true },
    }];
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = rockcharge_gateway::ServiceConfig::new(scenario, rockcharge_mission::trees::build_mission_trees());
    cfg.snapshot_dir = Some(dir.path().to_path_buf());
    cfg.heartbeat_every = 50;
    let mut s = common::Session::new(rockcharge_gateway::Service::new(cfg).unwrap());
    s.send(CommandKind::StartMission { scenario_ref: None });
    s.plan_ready();
    s.send(CommandKind::StartCharging);
    s.tick_until(10_000, |s| s.orchestrator().prompt().is_some());
    s.send(CommandKind::Pause);
    s.send(CommandKind::LoadSnapshot { snapshot_ref: "latest".into() });
    s.send(CommandKind::Resume);
    s.send(CommandKind::ResolveAssistance { resolution: ResolutionKind::SkipHole, args: None });
    s.send(CommandKind::StartCharging);
    s.tick_until(10_000, |s| s.orchestrator().phase() == Phase::MissionComplete);

    let sch = schema("event.schema.json");
    let mut seen: Vec<String> = Vec::new();
    for e in &s.log {
        let v = serde_json::to_value(e).unwrap();
        check(&sch, &v, "event").unwrap_or_else(|err| panic!("{err}\n{v}"));
        assert_eq!(&serde_json::from_value::<EventMsg>(v.clone()).unwrap(), e);
        let k = v["kind"].as_str().unwrap().to_string();
        if !seen.contains(&k) {
            seen.push(k);
        }
    }
    seen.sort();
    let mut all = kinds(&sch);
    all.sort();
    assert_eq!(seen, all, "the session should produce every event kind");
    assert!(s.log.iter().any(|e| matches!(&e.body, EventBody::CommandAck(a) if !a.is_accepted())));
}
