//! Wire types. One JSON object per line in both directions.

use std::collections::BTreeMap;

use rockcharge_core::{Status, TickTrace};
use rockcharge_fsm::{AssistancePrompt, Phase, ResolutionKind};
use rockcharge_mission::{ChargeHole, ChargingMission, HoleId};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub command_id: String,
    #[serde(default)]
    pub issued_by: String,
    #[serde(flatten)]
    pub kind: CommandKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ResolutionArgs {
    #[serde(default)]
    pub dx: f64,
    #[serde(default)]
    pub dy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CommandKind {
    StartMission {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scenario_ref: Option<String>,
    },
    StartCharging,
    RePlan,
    ScanAgain,
    Pause,
    Resume,
    EStop,
    ResolveAssistance {
        resolution: ResolutionKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        args: Option<ResolutionArgs>,
    },
    /// Offsets in meters.
    TeleopNudge { hole_id: HoleId, dx: f64, dy: f64 },
    LoadSnapshot {
        #[serde(rename = "ref")]
        snapshot_ref: String,
    },
    Shutdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum Ack {
    Accepted,
    Rejected { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandAck {
    pub command_id: String,
    #[serde(flatten)]
    pub ack: Ack,
}

impl CommandAck {
    pub fn is_accepted(&self) -> bool {
        self.ack == Ack::Accepted
    }
}

/// Compact per-tick trace: node statuses only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceView {
    pub tick: u64,
    pub statuses: Vec<(String, Status)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preempted: Vec<String>,
}

impl From<&TickTrace> for TraceView {
    fn from(t: &TickTrace) -> Self {
        TraceView {
            tick: t.tick,
            statuses: t.entries.iter().map(|e| (e.node_id.to_string(), e.status)).collect(),
            preempted: t.preempted.iter().map(|id| id.to_string()).collect(),
        }
    }
}

impl TraceView {
    pub fn status_of(&self, id: &str) -> Option<Status> {
        self.statuses.iter().find(|(n, _)| n == id).map(|(_, s)| *s)
    }
}

/// Full session state as a subscriber sees it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub phase: Option<Phase>,
    pub paused: bool,
    pub prompt: Option<AssistancePrompt>,
    pub holes: BTreeMap<HoleId, ChargeHole>,
    pub mission: Option<ChargingMission>,
    /// Tree whose node colors `node_status` holds.
    pub tree: Option<String>,
    pub node_status: BTreeMap<String, Status>,
    pub running: Vec<String>,
    pub last_snapshot: Option<String>,
    pub seq: u64,
    pub sim_time: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventBody {
    PhaseChanged { from: Phase, to: Phase },
    TickTraceBatch {
        phase: Phase,
        tree: Option<String>,
        traces: Vec<TraceView>,
        /// Nodes left Running after the batch.
        running: Vec<String>,
    },
    HoleUpdated { hole: ChargeHole },
    MissionUpdated { mission: Option<ChargingMission> },
    AssistancePromptRaised { prompt: AssistancePrompt },
    AssistancePromptCleared { resolution: ResolutionKind },
    PauseChanged { paused: bool },
    SnapshotWritten {
        #[serde(rename = "ref")]
        snapshot_ref: String,
    },
    CommandAck(CommandAck),
    ResyncState { state: Box<SessionView> },
    Heartbeat { phase: Phase },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventMsg {
    pub v: u32,
    pub seq: u64,
    pub sim_time: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

impl EventMsg {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}
