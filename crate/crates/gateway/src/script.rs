//! Headless mode: replay a scripted command file with no network.
//!
//! Steps are guarded so one script also drives a resumed run: a command
//! with `when` is issued only in that phase, and `wait_for` is satisfied by
//! any later phase of the mission.

use rockcharge_fsm::Phase;
use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::protocol::{Command, CommandAck, CommandKind, EventMsg};
use crate::service::Service;

fn default_max_ticks() -> u64 {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Command {
        #[serde(default)]
        command_id: Option<String>,
        #[serde(default)]
        when: Option<Phase>,
        #[serde(default)]
        expect_rejected: bool,
        command: CommandKind,
    },
    Ticks {
        count: u64,
    },
    /// Tick until `phase` is reached and its tree has returned.
    WaitFor {
        phase: Phase,
        #[serde(default = "default_max_ticks")]
        max_ticks: u64,
    },
    /// Tick until an assistance prompt is raised.
    WaitPrompt {
        #[serde(default = "default_max_ticks")]
        max_ticks: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default = "default_operator")]
    pub issued_by: String,
    pub steps: Vec<Step>,
}

fn default_operator() -> String {
    "headless".into()
}

impl Script {
    pub fn from_json(text: &str) -> Result<Script, GatewayError> {
        serde_json::from_str(text).map_err(|e| GatewayError::Script(e.to_string()))
    }
}

#[derive(Debug, Default)]
pub struct ScriptReport {
    pub acks: Vec<CommandAck>,
    pub shutdown: bool,
}

fn settled(service: &Service, phase: Phase) -> bool {
    let o = service.orchestrator();
    let now = o.phase();
    if now == phase {
        !o.tree_active()
    } else {
        phase != Phase::Idle && now > phase
    }
}

/// Run `script` against `service`. `sink` receives every event in order;
/// `after_tick` runs after each tick (used for fault injection).
pub fn run_script(
    service: &mut Service,
    script: &Script,
    sink: &mut dyn FnMut(&EventMsg) -> Result<(), GatewayError>,
    after_tick: &mut dyn FnMut(&Service),
) -> Result<ScriptReport, GatewayError> {
    let mut report = ScriptReport::default();
    let mut flush = |service: &mut Service| -> Result<(), GatewayError> {
        for e in service.drain() {
            sink(&e)?;
        }
        Ok(())
    };
    let mut tick = |service: &mut Service| -> Result<(), GatewayError> {
        service.tick()?;
        after_tick(service);
        Ok(())
    };
    flush(service)?;
    for (n, step) in script.steps.iter().enumerate() {
        match step {
            Step::Command { command_id, when, expect_rejected, command } => {
                if when.is_some_and(|p| p != service.orchestrator().phase()) {
                    continue;
                }
                let cmd = Command {
                    command_id: command_id.clone().unwrap_or_else(|| format!("script-{n}")),
                    issued_by: script.issued_by.clone(),
                    kind: command.clone(),
                };
                let ack = service.apply(cmd);
                flush(service)?;
                if ack.is_accepted() == *expect_rejected {
                    return Err(GatewayError::Script(format!("step {n}: unexpected ack {:?}", ack.ack)));
                }
                report.acks.push(ack);
                if service.is_shutdown() {
                    report.shutdown = true;
                    return Ok(report);
                }
            }
            Step::Ticks { count } => {
                for _ in 0..*count {
                    tick(service)?;
                    flush(service)?;
                }
            }
            Step::WaitFor { phase, max_ticks } => {
                let mut left = *max_ticks;
                while !settled(service, *phase) {
                    if let Some(p) = service.orchestrator().prompt() {
                        return Err(GatewayError::Script(format!(
                            "step {n}: assistance needed at `{}` ({})",
                            p.label,
                            p.reason.as_deref().unwrap_or("no reason given")
                        )));
                    }
                    if left == 0 {
                        return Err(GatewayError::Script(format!("step {n}: {phase} not reached")));
                    }
                    left -= 1;
                    tick(service)?;
                    flush(service)?;
                }
            }
            Step::WaitPrompt { max_ticks } => {
                let mut left = *max_ticks;
                while service.orchestrator().prompt().is_none() {
                    if left == 0 {
                        return Err(GatewayError::Script(format!("step {n}: no prompt raised")));
                    }
                    left -= 1;
                    tick(service)?;
                    flush(service)?;
                }
            }
        }
    }
    Ok(report)
}
