use std::fmt;

use rockcharge_mission::trees;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Idle,
    PreScan,
    DetectHoles,
    ChargePlan,
    Charging,
    MissionComplete,
}

impl Phase {
    pub const ALL: [Phase; 6] = [
        Phase::Idle,
        Phase::PreScan,
        Phase::DetectHoles,
        Phase::ChargePlan,
        Phase::Charging,
        Phase::MissionComplete,
    ];

    /// Name of the tree run in this phase; rest states have none.
    pub fn tree_name(self) -> Option<&'static str> {
        match self {
            Phase::PreScan => Some(trees::PRESCAN),
            Phase::DetectHoles => Some(trees::DETECT_HOLES),
            Phase::ChargePlan => Some(trees::CHARGE_PLAN),
            Phase::Charging => Some(trees::CHARGING),
            Phase::Idle | Phase::MissionComplete => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResolutionKind {
    Retry,
    SkipHole,
    RePlan,
    ScanAgain,
    TeleopNudge,
    Abort,
}

/// Operator answer to an assistance prompt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Resolution {
    Retry,
    SkipHole,
    RePlan,
    ScanAgain,
    /// Shift the failing hole's pose estimate (m), then retry.
    TeleopNudge { dx: f64, dy: f64 },
    Abort,
}

impl Resolution {
    pub fn kind(self) -> ResolutionKind {
        match self {
            Resolution::Retry => ResolutionKind::Retry,
            Resolution::SkipHole => ResolutionKind::SkipHole,
            Resolution::RePlan => ResolutionKind::RePlan,
            Resolution::ScanAgain => ResolutionKind::ScanAgain,
            Resolution::TeleopNudge { .. } => ResolutionKind::TeleopNudge,
            Resolution::Abort => ResolutionKind::Abort,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Event {
    StartMission,
    ScanComplete,
    NewHolesDetected,
    StartCharging,
    RePlan,
    ScanAgain,
    ChargingComplete,
    AssistanceResolved { resolution: Resolution },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Operator,
    Tree,
}

impl Event {
    pub fn origin(self) -> Origin {
        match self {
            Event::ScanComplete | Event::NewHolesDetected | Event::ChargingComplete => Origin::Tree,
            _ => Origin::Operator,
        }
    }

    /// One representative of every event kind.
    pub fn samples() -> Vec<Event> {
        let mut v = vec![
            Event::StartMission,
            Event::ScanComplete,
            Event::NewHolesDetected,
            Event::StartCharging,
            Event::RePlan,
            Event::ScanAgain,
            Event::ChargingComplete,
        ];
        for resolution in [
            Resolution::Retry,
            Resolution::SkipHole,
            Resolution::RePlan,
            Resolution::ScanAgain,
            Resolution::TeleopNudge { dx: 0.0, dy: 0.0 },
            Resolution::Abort,
        ] {
            v.push(Event::AssistanceResolved { resolution });
        }
        v
    }
}

/// The phase graph: exactly these seven edges.
pub struct TransitionTable;

impl TransitionTable {
    pub const ENTRIES: [(Phase, Event, Phase); 7] = [
        (Phase::Idle, Event::StartMission, Phase::PreScan),
        (Phase::PreScan, Event::ScanComplete, Phase::DetectHoles),
        (Phase::DetectHoles, Event::NewHolesDetected, Phase::ChargePlan),
        (Phase::ChargePlan, Event::StartCharging, Phase::Charging),
        (Phase::Charging, Event::RePlan, Phase::ChargePlan),
        (Phase::ChargePlan, Event::ScanAgain, Phase::DetectHoles),
        (Phase::Charging, Event::ChargingComplete, Phase::MissionComplete),
    ];

    pub fn next(phase: Phase, event: Event) -> Option<Phase> {
        Self::ENTRIES
            .iter()
            .find(|(from, e, _)| *from == phase && *e == event)
            .map(|(_, _, to)| *to)
    }

    /// Event a phase tree's Success emits. ChargePlan waits for the operator.
    pub fn on_success(phase: Phase) -> Option<Event> {
        match phase {
            Phase::PreScan => Some(Event::ScanComplete),
            Phase::DetectHoles => Some(Event::NewHolesDetected),
            Phase::Charging => Some(Event::ChargingComplete),
            _ => None,
        }
    }

    /// Resolutions offered when `phase` fails; hole-specific ones only when
    /// a hole was marked Failed.
    pub fn resolutions(phase: Phase, hole_failed: bool) -> Vec<ResolutionKind> {
        use ResolutionKind::*;
        match phase {
            Phase::Charging if hole_failed => vec![Retry, SkipHole, RePlan, TeleopNudge, Abort],
            Phase::Charging => vec![Retry, RePlan, Abort],
            Phase::ChargePlan => vec![Retry, ScanAgain, Abort],
            _ => vec![Retry, Abort],
        }
    }
}
