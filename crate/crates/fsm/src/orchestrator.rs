use std::collections::BTreeMap;

use rockcharge_core::dsl::TreeDocument;
use rockcharge_core::{BehaviorRegistry, Blackboard, NodeKind, Status, TickTrace, TreeNode, TreeRuntime, Value};
use rockcharge_mission::{ChargeHole, ChargingMission, HoleId, HoleState};
use rockcharge_sim::Rig;
use serde::{Deserialize, Serialize};

use crate::error::FsmError;
use crate::phase::{Event, Phase, Resolution, ResolutionKind, TransitionTable};
use crate::prompt::{locate_failure, AssistancePrompt};

/// Things observers need to know, drained by the gateway after every step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Notice {
    PhaseChanged { from: Phase, to: Phase },
    TickTrace { phase: Phase, trace: TickTrace },
    HoleUpdated { hole: ChargeHole },
    MissionUpdated { mission: Option<ChargingMission> },
    PromptRaised { prompt: AssistancePrompt },
    PromptCleared { resolution: ResolutionKind },
    Paused,
    Resumed,
}

/// Everything needed to rebuild an orchestrator; tree runtimes are not
/// part of it since every restore restarts the phase tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrchestratorState {
    pub phase: Phase,
    pub paused: bool,
    pub prompt: Option<AssistancePrompt>,
    /// The phase tree returned and is waiting for an operator event.
    pub tree_finished: bool,
    pub ticks: u64,
    pub blackboard: Blackboard,
    pub rig: Rig,
}

/// What one call to [`Orchestrator::step`] did.
#[derive(Clone, Debug, PartialEq)]
pub enum StepResult {
    /// No tree was ticked (rest phase, paused, finished or prompting).
    Waiting,
    Ticked(Status),
}

pub struct Orchestrator {
    doc: TreeDocument,
    registry: BehaviorRegistry<Rig>,
    runtime: Option<TreeRuntime>,
    state: OrchestratorState,
    notices: Vec<Notice>,
    seen_holes: BTreeMap<HoleId, ChargeHole>,
    seen_mission: Option<ChargingMission>,
}

impl Orchestrator {
    pub fn new(doc: TreeDocument, registry: BehaviorRegistry<Rig>, rig: Rig) -> Result<Self, FsmError> {
        let blackboard = Blackboard::with_schema(doc.blackboard.clone());
        let state = OrchestratorState {
            phase: Phase::Idle,
            paused: false,
            prompt: None,
            tree_finished: false,
            ticks: 0,
            blackboard,
            rig,
        };
        Self::from_state(doc, registry, state)
    }

    /// Rebuild from a saved state. An active phase tree restarts from a
    /// fresh runtime; leaves skip goals that already hold.
    pub fn from_state(
        doc: TreeDocument,
        registry: BehaviorRegistry<Rig>,
        state: OrchestratorState,
    ) -> Result<Self, FsmError> {
        for phase in Phase::ALL {
            if let Some(name) = phase.tree_name() {
                if !doc.trees.contains_key(name) {
                    return Err(FsmError::MissingTree(name.to_string()));
                }
            }
        }
        let mut o = Orchestrator {
            doc,
            registry,
            runtime: None,
            seen_holes: state.rig.site.holes.iter().map(|(k, h)| (k.clone(), h.clone())).collect(),
            seen_mission: state.rig.site.mission.clone(),
            state,
            notices: Vec::new(),
        };
        o.start_tree()?;
        Ok(o)
    }

    pub fn phase(&self) -> Phase {
        self.state.phase
    }

    pub fn is_paused(&self) -> bool {
        self.state.paused
    }

    pub fn prompt(&self) -> Option<&AssistancePrompt> {
        self.state.prompt.as_ref()
    }

    pub fn rig(&self) -> &Rig {
        &self.state.rig
    }

    pub fn blackboard(&self) -> &Blackboard {
        &self.state.blackboard
    }

    pub fn state(&self) -> &OrchestratorState {
        &self.state
    }

    pub fn ticks(&self) -> u64 {
        self.state.ticks
    }

    pub fn document(&self) -> &TreeDocument {
        &self.doc
    }

    /// The tree for the current phase, if it has one.
    pub fn active_tree(&self) -> Option<&TreeNode> {
        self.state.phase.tree_name().map(|n| &self.doc.trees[n])
    }

    /// Ids of Running nodes in the current phase tree.
    pub fn running_nodes(&self) -> Vec<String> {
        self.runtime
            .as_ref()
            .map(|rt| rt.running_nodes().into_iter().map(|id| id.to_string()).collect())
            .unwrap_or_default()
    }

    pub fn drain_notices(&mut self) -> Vec<Notice> {
        std::mem::take(&mut self.notices)
    }

    /// Apply a phase event. Events are refused while a prompt is waiting;
    /// the prompt's resolutions are the only way forward then.
    pub fn handle_event(&mut self, event: Event) -> Result<Phase, FsmError> {
        if self.state.prompt.is_some() {
            return Err(FsmError::PromptPending);
        }
        self.transition(event)
    }

    fn transition(&mut self, event: Event) -> Result<Phase, FsmError> {
        let from = self.state.phase;
        let to = TransitionTable::next(from, event).ok_or(FsmError::RejectedEvent { phase: from, event })?;
        if event == Event::RePlan {
            self.state.rig.site.mark_plan_dirty();
        }
        self.enter(to)?;
        Ok(to)
    }

    /// Halt whatever runs, then start `to`'s tree.
    fn enter(&mut self, to: Phase) -> Result<(), FsmError> {
        self.halt_tree()?;
        let from = self.state.phase;
        self.state.phase = to;
        self.notices.push(Notice::PhaseChanged { from, to });
        self.start_tree()?;
        self.publish_diffs();
        Ok(())
    }

    fn halt_tree(&mut self) -> Result<(), FsmError> {
        if let (Some(rt), Some(name)) = (self.runtime.as_mut(), self.state.phase.tree_name()) {
            let tree = &self.doc.trees[name];
            rt.halt(tree, &tree.id, &mut self.state.blackboard, &mut self.registry, &mut self.state.rig)?;
        }
        self.runtime = None;
        Ok(())
    }

    fn start_tree(&mut self) -> Result<(), FsmError> {
        self.runtime = match self.state.phase.tree_name() {
            Some(name) => Some(TreeRuntime::new(&self.doc.trees[name])?),
            None => None,
        };
        if self.runtime.is_some() && self.state.prompt.is_none() {
            self.state.tree_finished = false;
            self.state.rig.restart(&mut self.state.blackboard);
        }
        Ok(())
    }

    /// One orchestrator tick: tick the phase tree (if it should run), then
    /// advance simulated time by one step.
    pub fn step(&mut self) -> Result<StepResult, FsmError> {
        if self.state.paused {
            return Ok(StepResult::Waiting);
        }
        let mut result = StepResult::Waiting;
        if self.state.prompt.is_none() && !self.state.tree_finished {
            if let (Some(rt), Some(name)) = (self.runtime.as_mut(), self.state.phase.tree_name()) {
                let tree = &self.doc.trees[name];
                let (status, trace) =
                    rt.tick(tree, &mut self.state.blackboard, &mut self.registry, &mut self.state.rig)?;
                self.notices.push(Notice::TickTrace { phase: self.state.phase, trace: trace.clone() });
                if status != Status::Running {
                    self.on_tree_result(status, &trace)?;
                }
                result = StepResult::Ticked(status);
            }
        }
        self.state.rig.world.step(1);
        self.state.ticks += 1;
        self.publish_diffs();
        Ok(result)
    }

    /// React to a phase tree returning. Success emits the phase's event
    /// (ChargePlan waits for the operator); Failure raises a prompt.
    pub fn on_tree_result(&mut self, status: Status, trace: &TickTrace) -> Result<Option<Event>, FsmError> {
        self.state.tree_finished = true;
        match status {
            Status::Running => {
                self.state.tree_finished = false;
                Ok(None)
            }
            Status::Success => match TransitionTable::on_success(self.state.phase) {
                Some(event) => {
                    self.transition(event)?;
                    Ok(Some(event))
                }
                None => Ok(None),
            },
            Status::Failure => {
                self.raise_prompt(trace);
                Ok(None)
            }
        }
    }

    fn raise_prompt(&mut self, trace: &TickTrace) {
        let phase = self.state.phase;
        let tree = &self.doc.trees[phase.tree_name().expect("only phase trees fail")];
        let point = locate_failure(tree, trace);
        let hole = match &point.leaf.kind {
            NodeKind::Action { ports, .. } | NodeKind::Condition { ports, .. } => ports
                .get("hole")
                .and_then(|key| self.state.blackboard.peek(key))
                .and_then(|v| match v {
                    Value::Hole(h) => Some(HoleId::new(h.id.clone())),
                    _ => None,
                }),
            _ => None,
        };
        let mut hole_failed = false;
        if phase == Phase::Charging {
            if let Some(id) = &hole {
                let site = &mut self.state.rig.site;
                if site.hole(id).is_some_and(|h| h.state == HoleState::Charging) {
                    hole_failed = site.set_state(id, HoleState::Failed).is_ok();
                }
            }
        }
        let node = point.node();
        let prompt = AssistancePrompt {
            phase,
            node_id: node.id.clone(),
            label: node.label.clone(),
            leaf_id: Some(point.leaf.id.clone()),
            hole: hole.filter(|_| hole_failed || phase != Phase::Charging),
            reason: self.state.rig.world.last_failure.clone(),
            resolutions: TransitionTable::resolutions(phase, hole_failed),
        };
        self.notices.push(Notice::PromptRaised { prompt: prompt.clone() });
        self.state.prompt = Some(prompt);
    }

    /// Halt the phase tree and stop ticking. Requires a phase tree.
    pub fn pause(&mut self) -> Result<(), FsmError> {
        if self.state.paused {
            return Err(FsmError::AlreadyPaused);
        }
        if self.state.phase.tree_name().is_none() {
            return Err(FsmError::NotRunning);
        }
        self.halt_tree()?;
        self.state.paused = true;
        self.notices.push(Notice::Paused);
        Ok(())
    }

    /// Restart the phase tree from a fresh runtime.
    pub fn resume(&mut self) -> Result<(), FsmError> {
        if !self.state.paused {
            return Err(FsmError::NotPaused);
        }
        self.state.paused = false;
        self.start_tree()?;
        self.notices.push(Notice::Resumed);
        Ok(())
    }

    pub fn resolve_assistance(&mut self, resolution: Resolution) -> Result<Phase, FsmError> {
        let prompt = self.state.prompt.as_ref().ok_or(FsmError::NoActivePrompt)?;
        let kind = resolution.kind();
        if !prompt.offers(kind) {
            return Err(FsmError::InvalidResolutionForPhase { phase: prompt.phase, resolution: kind });
        }
        let hole = prompt.hole.clone();
        let failed_hole = hole
            .clone()
            .filter(|id| self.state.rig.site.hole(id).is_some_and(|h| h.state == HoleState::Failed));
        match resolution {
            Resolution::TeleopNudge { dx, dy } => {
                if let Some(id) = &hole {
                    self.state.rig.teleop_nudge(id, dx, dy)?;
                }
                self.retry_hole(failed_hole.as_ref())?;
            }
            Resolution::Retry => self.retry_hole(failed_hole.as_ref())?,
            Resolution::SkipHole => {
                if let Some(id) = &failed_hole {
                    self.state.rig.site.set_state(id, HoleState::Skipped)?;
                }
            }
            Resolution::RePlan | Resolution::ScanAgain | Resolution::Abort => {}
        }
        self.state.prompt = None;
        self.state.rig.world.last_failure = None;
        self.notices.push(Notice::PromptCleared { resolution: kind });
        match resolution {
            Resolution::RePlan => {
                self.transition(Event::RePlan)?;
            }
            Resolution::ScanAgain => {
                self.transition(Event::ScanAgain)?;
            }
            Resolution::Abort => self.enter(Phase::Idle)?,
            _ => {
                self.halt_tree()?;
                self.start_tree()?;
                self.publish_diffs();
            }
        }
        Ok(self.state.phase)
    }

    /// Teleoperation outside a prompt: only while no tree is ticking.
    pub fn teleop_nudge(&mut self, hole: &HoleId, dx: f64, dy: f64) -> Result<(), FsmError> {
        if self.tree_active() {
            return Err(FsmError::TreeActive);
        }
        self.state.rig.teleop_nudge(hole, dx, dy)?;
        self.publish_diffs();
        Ok(())
    }

    /// A phase tree is being ticked.
    pub fn tree_active(&self) -> bool {
        self.runtime.is_some() && !self.state.paused && !self.state.tree_finished && self.state.prompt.is_none()
    }

    fn retry_hole(&mut self, hole: Option<&HoleId>) -> Result<(), FsmError> {
        if let Some(id) = hole {
            self.state.rig.site.set_state(id, HoleState::Charging)?;
        }
        Ok(())
    }

    fn publish_diffs(&mut self) {
        for (id, hole) in &self.state.rig.site.holes {
            if self.seen_holes.get(id) != Some(hole) {
                self.seen_holes.insert(id.clone(), hole.clone());
                self.notices.push(Notice::HoleUpdated { hole: hole.clone() });
            }
        }
        if self.seen_mission != self.state.rig.site.mission {
            self.seen_mission = self.state.rig.site.mission.clone();
            self.notices.push(Notice::MissionUpdated { mission: self.seen_mission.clone() });
        }
    }
}
