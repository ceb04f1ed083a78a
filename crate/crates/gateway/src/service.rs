//! The tick-loop owner. Commands are applied between ticks; everything that
//! changes is published as an [`EventMsg`].

use rockcharge_fsm::{Event, FsmError, Notice, Orchestrator, Phase, Resolution, ResolutionKind};
use rockcharge_mission::{HoleState, PlanParams, Worksite};
use rockcharge_sim::{registry, Outcome, Rig, Scenario};
use serde::{Deserialize, Serialize};

use crate::config::{check_trees, load_scenario, ServiceConfig};
use crate::error::GatewayError;
use crate::protocol::{
    Ack, Command, CommandAck, CommandKind, EventBody, EventMsg, SessionView, TraceView, PROTOCOL_VERSION,
};
use crate::snapshot::{self, SnapshotFile};

/// End-of-run report written by headless mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub phase: Phase,
    pub ticks: u64,
    pub sim_time: u64,
    pub prompts: u32,
    pub outcome: Outcome,
    pub total_pumped_g: u64,
    /// Σ emulsion targets of Charged holes, in grams.
    pub charged_target_g: u64,
}

pub struct Service {
    cfg: ServiceConfig,
    config_hash: String,
    orch: Orchestrator,
    seq: u64,
    view: SessionView,
    outbox: Vec<EventMsg>,
    prompts: u32,
    shutdown: bool,
}

fn orchestrator(cfg: &ServiceConfig) -> Result<Orchestrator, GatewayError> {
    let rig = Rig::new(&cfg.scenario, Worksite::new(PlanParams::default()));
    Ok(Orchestrator::new(cfg.trees.clone(), registry(), rig)?)
}

fn validate(cfg: &ServiceConfig) -> Result<(), GatewayError> {
    cfg.scenario.validate().map_err(|e| GatewayError::InvalidScenario(e.to_string()))?;
    check_trees(&cfg.trees, &registry())
}

impl Service {
    pub fn new(cfg: ServiceConfig) -> Result<Service, GatewayError> {
        validate(&cfg)?;
        let orch = orchestrator(&cfg).map_err(startup)?;
        let mut s = Service {
            config_hash: cfg.hash(),
            cfg,
            orch,
            seq: 0,
            view: SessionView::default(),
            outbox: Vec::new(),
            prompts: 0,
            shutdown: false,
        };
        s.view = s.current_view();
        if s.cfg.snapshot_dir.is_some() {
            s.save_snapshot()?;
        }
        Ok(s)
    }

    /// Start from a saved snapshot instead of a fresh mission.
    pub fn resume(cfg: ServiceConfig, reference: &str) -> Result<Service, GatewayError> {
        let mut s = Service::new_without_snapshot(cfg)?;
        s.load_snapshot(reference)?;
        Ok(s)
    }

    fn new_without_snapshot(mut cfg: ServiceConfig) -> Result<Service, GatewayError> {
        let dir = cfg.snapshot_dir.take();
        let mut s = Service::new(cfg)?;
        s.cfg.snapshot_dir = dir;
        Ok(s)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn orchestrator(&self) -> &Orchestrator {
        &self.orch
    }

    /// The view as rebuilt from this service's own event stream.
    pub fn view(&self) -> &SessionView {
        &self.view
    }

    pub fn is_shutdown(&self) -> bool {
        self.shutdown
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn sim_time(&self) -> u64 {
        self.orch.rig().world.sim_time
    }

    pub fn drain(&mut self) -> Vec<EventMsg> {
        std::mem::take(&mut self.outbox)
    }

    /// Full state for a subscriber joining mid-session. Carries the current
    /// seq, so the next incremental event follows it without a gap.
    pub fn resync(&self) -> EventMsg {
        EventMsg {
            v: PROTOCOL_VERSION,
            seq: self.seq,
            sim_time: self.sim_time(),
            body: EventBody::ResyncState { state: Box::new(self.view.clone()) },
        }
    }

    /// The view computed directly from orchestrator state. Node colors are
    /// not derivable from state and are carried over from the event view.
    pub fn current_view(&self) -> SessionView {
        let site = &self.orch.rig().site;
        SessionView {
            phase: Some(self.orch.phase()),
            paused: self.orch.is_paused(),
            prompt: self.orch.prompt().cloned(),
            holes: site.holes.clone(),
            mission: site.mission.clone(),
            tree: self.view.tree.clone(),
            node_status: self.view.node_status.clone(),
            running: self.orch.running_nodes(),
            last_snapshot: self.view.last_snapshot.clone(),
            seq: self.seq,
            sim_time: self.sim_time(),
        }
    }

    fn emit(&mut self, mut body: EventBody) {
        self.seq += 1;
        if let EventBody::ResyncState { state } = &mut body {
            state.seq = self.seq;
            state.sim_time = self.sim_time();
        }
        let msg = EventMsg { v: PROTOCOL_VERSION, seq: self.seq, sim_time: self.sim_time(), body };
        self.view.apply(&msg);
        self.outbox.push(msg);
    }

    fn publish_notices(&mut self) {
        for notice in self.orch.drain_notices() {
            let body = match notice {
                Notice::PhaseChanged { from, to } => EventBody::PhaseChanged { from, to },
                Notice::TickTrace { phase, trace } => EventBody::TickTraceBatch {
                    phase,
                    tree: phase.tree_name().map(str::to_string),
                    traces: vec![TraceView::from(&trace)],
                    running: self.orch.running_nodes(),
                },
                Notice::HoleUpdated { hole } => EventBody::HoleUpdated { hole },
                Notice::MissionUpdated { mission } => EventBody::MissionUpdated { mission },
                Notice::PromptRaised { prompt } => {
                    self.prompts += 1;
                    EventBody::AssistancePromptRaised { prompt }
                }
                Notice::PromptCleared { resolution } => EventBody::AssistancePromptCleared { resolution },
                Notice::Paused => EventBody::PauseChanged { paused: true },
                Notice::Resumed => EventBody::PauseChanged { paused: false },
            };
            self.emit(body);
        }
    }

    /// One tick of the loop: orchestrator step, then periodic snapshot and
    /// heartbeat.
    pub fn tick(&mut self) -> Result<(), GatewayError> {
        self.orch.step()?;
        self.publish_notices();
        let ticks = self.orch.ticks();
        if self.cfg.snapshot_dir.is_some() && self.cfg.snapshot_every > 0 && ticks.is_multiple_of(self.cfg.snapshot_every) {
            self.save_snapshot()?;
        }
        if self.cfg.heartbeat_every > 0 && ticks.is_multiple_of(self.cfg.heartbeat_every) {
            self.emit(EventBody::Heartbeat { phase: self.orch.phase() });
        }
        Ok(())
    }

    /// Apply a command. Rejections are acks, never errors.
    pub fn apply(&mut self, cmd: Command) -> CommandAck {
        let mut deferred = Vec::new();
        let result = self.execute(&cmd.kind, &mut deferred);
        let ack = CommandAck {
            command_id: cmd.command_id,
            ack: match result {
                Ok(()) => Ack::Accepted,
                Err(reason) => Ack::Rejected { reason },
            },
        };
        // the ack comes first, then what the command caused
        self.emit(EventBody::CommandAck(ack.clone()));
        self.publish_notices();
        for body in deferred {
            self.emit(body);
        }
        ack
    }

    /// Acknowledge something that never became a command.
    pub fn reject(&mut self, command_id: String, reason: String) -> CommandAck {
        let ack = CommandAck { command_id, ack: Ack::Rejected { reason } };
        self.emit(EventBody::CommandAck(ack.clone()));
        ack
    }

    fn execute(&mut self, kind: &CommandKind, deferred: &mut Vec<EventBody>) -> Result<(), String> {
        let fsm = |e: FsmError| match e {
            FsmError::RejectedEvent { phase, event } => {
                format!("invalid transition: {event:?} is not accepted in {phase}")
            }
            other => other.to_string(),
        };
        match kind {
            CommandKind::StartMission { scenario_ref } => {
                if let Some(path) = scenario_ref {
                    if self.orch.phase() != Phase::Idle || self.orch.prompt().is_some() {
                        return Err(fsm(FsmError::RejectedEvent {
                            phase: self.orch.phase(),
                            event: Event::StartMission,
                        }));
                    }
                    let scenario = load_scenario(path.as_ref()).map_err(|e| e.to_string())?;
                    self.switch_scenario(scenario).map_err(|e| e.to_string())?;
                    deferred.push(self.resync_body());
                }
                self.orch.handle_event(Event::StartMission).map(drop).map_err(fsm)
            }
            CommandKind::StartCharging => self.orch.handle_event(Event::StartCharging).map(drop).map_err(fsm),
            CommandKind::RePlan => self.orch.handle_event(Event::RePlan).map(drop).map_err(fsm),
            CommandKind::ScanAgain => self.orch.handle_event(Event::ScanAgain).map(drop).map_err(fsm),
            CommandKind::Pause => {
                self.orch.pause().map_err(fsm)?;
                self.snapshot_for_command(deferred)
            }
            CommandKind::Resume => self.orch.resume().map_err(fsm),
            CommandKind::EStop => {
                if !self.orch.is_paused() && self.orch.phase().tree_name().is_some() {
                    self.orch.pause().map_err(fsm)?;
                }
                let phase = self.orch.phase();
                deferred.push(EventBody::TickTraceBatch {
                    phase,
                    tree: phase.tree_name().map(str::to_string),
                    traces: Vec::new(),
                    running: self.orch.running_nodes(),
                });
                self.snapshot_for_command(deferred)
            }
            CommandKind::ResolveAssistance { resolution, args } => {
                let resolution = match resolution {
                    ResolutionKind::Retry => Resolution::Retry,
                    ResolutionKind::SkipHole => Resolution::SkipHole,
                    ResolutionKind::RePlan => Resolution::RePlan,
                    ResolutionKind::ScanAgain => Resolution::ScanAgain,
                    ResolutionKind::Abort => Resolution::Abort,
                    ResolutionKind::TeleopNudge => {
                        let a = args.ok_or("TeleopNudge needs args {dx, dy}")?;
                        Resolution::TeleopNudge { dx: a.dx, dy: a.dy }
                    }
                };
                self.orch.resolve_assistance(resolution).map(drop).map_err(fsm)
            }
            CommandKind::TeleopNudge { hole_id, dx, dy } => {
                let prompted = self
                    .orch
                    .prompt()
                    .is_some_and(|p| p.hole.as_ref() == Some(hole_id) && p.offers(ResolutionKind::TeleopNudge));
                if prompted {
                    self.orch
                        .resolve_assistance(Resolution::TeleopNudge { dx: *dx, dy: *dy })
                        .map(drop)
                        .map_err(fsm)
                } else {
                    self.orch.teleop_nudge(hole_id, *dx, *dy).map_err(fsm)
                }
            }
            CommandKind::LoadSnapshot { snapshot_ref } => {
                if self.orch.phase() != Phase::Idle && !self.orch.is_paused() {
                    return Err("load requires Idle or Paused".into());
                }
                self.restore_snapshot(snapshot_ref).map_err(|e| e.to_string())?;
                deferred.push(self.resync_body());
                Ok(())
            }
            CommandKind::Shutdown => {
                self.shutdown = true;
                Ok(())
            }
        }
    }

    fn snapshot_for_command(&mut self, deferred: &mut Vec<EventBody>) -> Result<(), String> {
        if self.cfg.snapshot_dir.is_some() {
            let name = self.write_snapshot().map_err(|e| e.to_string())?;
            deferred.push(EventBody::SnapshotWritten { snapshot_ref: name });
        }
        Ok(())
    }

    fn switch_scenario(&mut self, scenario: Scenario) -> Result<(), GatewayError> {
        let mut cfg = self.cfg.clone();
        cfg.scenario = scenario;
        validate(&cfg)?;
        self.orch = orchestrator(&cfg)?;
        self.config_hash = cfg.hash();
        self.cfg = cfg;
        Ok(())
    }

    /// A resync carrying the state as of the event that will hold it.
    /// Pending orchestrator notices are already reflected in it.
    fn resync_body(&mut self) -> EventBody {
        self.orch.drain_notices();
        let mut state = self.current_view();
        state.node_status.clear();
        state.tree = None;
        EventBody::ResyncState { state: Box::new(state) }
    }

    fn emit_resync(&mut self) {
        let body = self.resync_body();
        self.emit(body);
    }

    pub fn save_snapshot(&mut self) -> Result<String, GatewayError> {
        let name = self.write_snapshot()?;
        self.emit(EventBody::SnapshotWritten { snapshot_ref: name.clone() });
        Ok(name)
    }

    fn write_snapshot(&mut self) -> Result<String, GatewayError> {
        let dir = self
            .cfg
            .snapshot_dir
            .clone()
            .ok_or_else(|| GatewayError::SnapshotNotFound("no snapshot directory configured".into()))?;
        let snap = SnapshotFile::capture(self.orch.state(), &self.config_hash, self.seq);
        snapshot::save(&dir, &snap)
    }

    /// Restore a snapshot and re-enter its phase with a fresh tree runtime.
    pub fn load_snapshot(&mut self, reference: &str) -> Result<(), GatewayError> {
        self.restore_snapshot(reference)?;
        self.emit_resync();
        Ok(())
    }

    fn restore_snapshot(&mut self, reference: &str) -> Result<(), GatewayError> {
        let path = snapshot::resolve(self.cfg.snapshot_dir.as_deref(), reference)?;
        let snap = snapshot::load(&path)?;
        if snap.config_hash != self.config_hash {
            return Err(GatewayError::ConfigMismatch {
                expected: self.config_hash.clone(),
                found: snap.config_hash,
            });
        }
        let seq = snap.seq;
        let state = snap.into_state(&path.display().to_string())?;
        self.orch = Orchestrator::from_state(self.cfg.trees.clone(), registry(), state)?;
        self.orch.drain_notices();
        self.seq = self.seq.max(seq);
        self.view.last_snapshot = path.file_name().map(|n| n.to_string_lossy().into_owned());
        Ok(())
    }

    pub fn summary(&self) -> Summary {
        let rig = self.orch.rig();
        let charged_target_g = rig
            .site
            .holes
            .values()
            .filter(|h| h.state == HoleState::Charged)
            .map(Rig::target_g)
            .sum();
        Summary {
            phase: self.orch.phase(),
            ticks: self.orch.ticks(),
            sim_time: self.sim_time(),
            prompts: self.prompts,
            outcome: rig.outcome(),
            total_pumped_g: rig.world.total_pumped_g(),
            charged_target_g,
        }
    }
}

fn startup(e: GatewayError) -> GatewayError {
    match e {
        GatewayError::Orchestrator(FsmError::MissingTree(name)) => {
            GatewayError::TreeLoad(format!("tree `{name}` is missing"))
        }
        other => other,
    }
}
