use crate::protocol::{EventBody, EventMsg, SessionView};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applied {
    Ok,
    /// Sequence gap: the subscriber must ask for a resync.
    Gap { expected: u64, got: u64 },
}

impl SessionView {
    /// Fold one event into the view. The view is a pure function of the
    /// event stream; nothing else is consulted.
    pub fn apply(&mut self, msg: &EventMsg) -> Applied {
        if let EventBody::ResyncState { state } = &msg.body {
            *self = (**state).clone();
            return Applied::Ok;
        }
        if self.seq != 0 && msg.seq != self.seq + 1 {
            return Applied::Gap { expected: self.seq + 1, got: msg.seq };
        }
        self.seq = msg.seq;
        self.sim_time = msg.sim_time;
        match &msg.body {
            EventBody::PhaseChanged { to, .. } => {
                self.phase = Some(*to);
                self.node_status.clear();
                self.running.clear();
                self.tree = None;
            }
            EventBody::TickTraceBatch { phase, tree, traces, running } => {
                self.phase = Some(*phase);
                self.tree = tree.clone();
                if let Some(last) = traces.last() {
                    self.node_status = last.statuses.iter().cloned().collect();
                }
                self.running = running.clone();
            }
            EventBody::HoleUpdated { hole } => {
                self.holes.insert(hole.id.clone(), hole.clone());
            }
            EventBody::MissionUpdated { mission } => self.mission = mission.clone(),
            EventBody::AssistancePromptRaised { prompt } => self.prompt = Some(prompt.clone()),
            EventBody::AssistancePromptCleared { .. } => self.prompt = None,
            EventBody::PauseChanged { paused } => self.paused = *paused,
            EventBody::SnapshotWritten { snapshot_ref } => self.last_snapshot = Some(snapshot_ref.clone()),
            EventBody::Heartbeat { phase } => self.phase = Some(*phase),
            EventBody::CommandAck(_) | EventBody::ResyncState { .. } => {}
        }
        Applied::Ok
    }
}

/// Rebuild a view from a recorded event log.
pub fn replay<'a>(events: impl IntoIterator<Item = &'a EventMsg>) -> SessionView {
    let mut view = SessionView::default();
    for e in events {
        view.apply(e);
    }
    view
}
