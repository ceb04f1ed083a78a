use std::collections::{BTreeMap, BTreeSet};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{FaultConfig, FaultKind, Scenario, SimConfig, Trigger};
use crate::error::SimError;
use crate::rng::{Channel, KeyedRng};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Actor {
    Scanner,
    Boom,
    /// Charging manipulator with the hose.
    Primary,
    /// Explosives-handling manipulator.
    Secondary,
    Handover,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Task {
    Scan,
    Detect,
    MoveBoom { region: (i64, i64) },
    Position { hole: String },
    Sweep { hole: String },
    Assemble,
    Insert,
    Handover,
    Wiggle { hole: String },
    /// Progress-driven: advances by the feed rate each step.
    Feed { hole: String },
    /// Progress-driven: advances by the pump rate each step.
    Pump { hole: String, target_g: u64, depth_mm: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub task: Task,
    /// Node id of the leaf currently driving this activity.
    pub owner: String,
    pub started: u64,
    pub due: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueHole {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Secondary {
    /// A primed detonator is seated in the hose-tip cartridge, ready to hand over.
    pub holding_detonator: bool,
    /// Detonator and primer assembled but not yet seated.
    pub assembled: bool,
    pub prepared_for: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Hose {
    pub deployed_mm: u32,
    pub in_hole: Option<String>,
    /// The charging manipulator's hose tip carries a primed detonator.
    pub tip_loaded: bool,
    /// A feed was preempted; the next feed retracts fully first.
    pub interrupted: bool,
    pub retracting: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blockage {
    pub at_mm: u32,
    pub persistent: bool,
    pub cleared: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimWorld {
    pub config: SimConfig,
    pub faults: FaultConfig,
    pub face_w: f64,
    pub face_h: f64,
    pub truth: BTreeMap<String, TrueHole>,
    pub sim_time: u64,
    pub rng: KeyedRng,
    pub scanned: bool,
    pub detect_rounds: u32,
    pub boom_region: Option<(i64, i64)>,
    /// Hole the charging tool is aligned with.
    pub tool_at: Option<String>,
    pub secondary: Secondary,
    pub hose: Hose,
    pub inventory: u32,
    pub detonators_used: u32,
    pub detonators_dropped: u32,
    pub pumped_g: BTreeMap<String, u64>,
    pub pump_completions: BTreeMap<String, u32>,
    pub fed_to_bottom: BTreeSet<String>,
    /// Holes that received their detonator and emulsion.
    pub primed: BTreeSet<String>,
    /// Found by a sweep; the estimate was corrected to truth.
    pub located: BTreeSet<String>,
    /// Last approach failed to find the hole.
    pub lost: BTreeSet<String>,
    /// Blockage decision per hole, made at its first feed.
    pub blockages: BTreeMap<String, Option<Blockage>>,
    /// Indices into `faults.scripted_faults` that have fired.
    pub fired: BTreeSet<usize>,
    pub activities: BTreeMap<Actor, Activity>,
    pub last_failure: Option<String>,
    pub fault_log: Vec<String>,
}

fn mm(m: f64) -> u32 {
    (m * 1000.0).round() as u32
}

impl SimWorld {
    pub fn new(scenario: &Scenario) -> SimWorld {
        SimWorld {
            config: scenario.sim.clone(),
            faults: scenario.fault_config.clone(),
            face_w: scenario.face.w,
            face_h: scenario.face.h,
            truth: scenario
                .holes
                .iter()
                .map(|h| (h.id.clone(), TrueHole { x: h.x, y: h.y, depth: h.depth }))
                .collect(),
            sim_time: 0,
            rng: KeyedRng::new(scenario.seed),
            scanned: false,
            detect_rounds: 0,
            boom_region: None,
            tool_at: None,
            secondary: Secondary::default(),
            hose: Hose::default(),
            inventory: scenario.detonators,
            detonators_used: 0,
            detonators_dropped: 0,
            pumped_g: BTreeMap::new(),
            pump_completions: BTreeMap::new(),
            fed_to_bottom: BTreeSet::new(),
            primed: BTreeSet::new(),
            located: BTreeSet::new(),
            lost: BTreeSet::new(),
            blockages: BTreeMap::new(),
            fired: BTreeSet::new(),
            activities: BTreeMap::new(),
            last_failure: None,
            fault_log: Vec::new(),
        }
    }

    /// Advance simulated time. Timed activities become due; the hose
    /// moves and the pump delivers at their rates.
    pub fn step(&mut self, ticks: u64) {
        for _ in 0..ticks {
            self.sim_time += 1;
            let Some(a) = self.activities.get(&Actor::Primary) else { continue };
            match a.task.clone() {
                Task::Feed { hole } => self.advance_feed(&hole),
                Task::Pump { hole, target_g, depth_mm } => {
                    let done = self.pumped_g.entry(hole).or_insert(0);
                    *done = (*done + self.config.pump_rate_g).min(target_g);
                    let remaining = target_g - *done;
                    self.hose.deployed_mm = (depth_mm as u64 * remaining / target_g) as u32;
                }
                _ => {}
            }
        }
    }

    fn advance_feed(&mut self, hole: &str) {
        if self.hose.retracting {
            self.hose.deployed_mm = self.hose.deployed_mm.saturating_sub(self.config.retract_rate_mm);
            if self.hose.deployed_mm == 0 {
                self.hose.retracting = false;
            }
            return;
        }
        let limit = self.feed_limit_mm(hole);
        self.hose.deployed_mm = (self.hose.deployed_mm + self.config.feed_rate_mm).min(limit);
    }

    /// How deep the hose can go right now.
    pub fn feed_limit_mm(&self, hole: &str) -> u32 {
        let depth = self.truth.get(hole).map_or(0, |h| mm(h.depth)).min(self.config.hose_max_mm);
        match self.blockages.get(hole) {
            Some(Some(b)) if !b.cleared => b.at_mm.min(depth),
            _ => depth,
        }
    }

    pub fn hole_depth_mm(&self, hole: &str) -> u32 {
        self.truth.get(hole).map_or(0, |h| mm(h.depth))
    }

    /// True when the hose sits at an uncleared blockage in `hole`.
    pub fn hose_stuck(&self, hole: &str) -> bool {
        matches!(self.blockages.get(hole), Some(Some(b)) if !b.cleared && self.hose.deployed_mm >= b.at_mm)
            && !self.hose.retracting
            && self.hose.in_hole.as_deref() == Some(hole)
    }

    /// Drive a timed activity for `owner`. Starts it, or adopts an identical
    /// one already running on the same actor. Returns true, and removes the
    /// activity, once it is due.
    pub fn run(&mut self, actor: Actor, owner: &str, task: Task, duration: u64) -> bool {
        let now = self.sim_time;
        match self.activities.get_mut(&actor) {
            Some(a) if a.task == task => a.owner = owner.to_string(),
            Some(_) => {
                self.abort(actor);
                self.activities.insert(actor, Activity { task, owner: owner.into(), started: now, due: now + duration });
            }
            None => {
                self.activities.insert(actor, Activity { task, owner: owner.into(), started: now, due: now + duration });
            }
        }
        let due = self.activities[&actor].due;
        if now >= due {
            self.activities.remove(&actor);
            true
        } else {
            false
        }
    }

    /// Start or adopt a progress-driven activity; completion is decided by the caller.
    pub fn drive(&mut self, actor: Actor, owner: &str, task: Task) {
        let started = match self.activities.get(&actor) {
            Some(a) if a.task == task => false,
            Some(_) => {
                self.abort(actor);
                true
            }
            None => true,
        };
        if started {
            if let Task::Feed { hole } = &task {
                if self.hose.interrupted || (self.hose.deployed_mm > 0 && self.hose.in_hole.as_ref() != Some(hole)) {
                    self.hose.retracting = true;
                }
                self.hose.interrupted = false;
                self.hose.in_hole = Some(hole.clone());
            }
        }
        let now = self.sim_time;
        let a = self
            .activities
            .entry(actor)
            .or_insert(Activity { task, owner: String::new(), started: now, due: now });
        a.owner = owner.to_string();
    }

    pub fn finish(&mut self, actor: Actor) -> Option<Activity> {
        self.activities.remove(&actor)
    }

    pub fn activity(&self, actor: Actor) -> Option<&Activity> {
        self.activities.get(&actor)
    }

    /// Cancel whatever `actor` is doing, leaving the world consistent.
    pub fn abort(&mut self, actor: Actor) {
        if let Some(a) = self.activities.remove(&actor) {
            if let Task::Feed { .. } = a.task {
                self.hose.interrupted = true;
                self.hose.retracting = false;
            }
        }
    }

    /// Preemption of `owner`: cancel the activities it drives.
    pub fn cancel_owned(&mut self, owner: &str) {
        let actors: Vec<Actor> = self
            .activities
            .iter()
            .filter(|(_, a)| a.owner == owner)
            .map(|(k, _)| *k)
            .collect();
        for actor in actors {
            self.abort(actor);
        }
    }

    pub fn abort_all(&mut self) {
        let actors: Vec<Actor> = self.activities.keys().copied().collect();
        for actor in actors {
            self.abort(actor);
        }
    }

    pub fn is_idle(&self) -> bool {
        self.activities.is_empty()
    }

    /// Fire the first unfired scripted fault matching `hole` and `pick`.
    pub fn scripted(&mut self, hole: &str, pick: impl Fn(&FaultKind) -> bool) -> Option<FaultKind> {
        let now = self.sim_time;
        let idx = self.faults.scripted_faults.iter().enumerate().position(|(i, f)| {
            !self.fired.contains(&i)
                && pick(&f.kind)
                && match &f.trigger {
                    Trigger::Tick(t) => now >= *t,
                    Trigger::Hole(h) => h == hole,
                }
        })?;
        self.fired.insert(idx);
        let kind = self.faults.scripted_faults[idx].kind.clone();
        self.fault_log.push(format!("t={now} {hole}: {kind:?}"));
        Some(kind)
    }

    pub fn region_of(&self, x: f64, y: f64) -> (i64, i64) {
        let s = self.config.boom_region_size;
        ((x / s).floor() as i64, (y / s).floor() as i64)
    }

    /// One detection round: every true hole, seen through noisy vision.
    pub fn detect(&mut self) -> Vec<(String, f64, f64, f64)> {
        self.detect_rounds += 1;
        let sigma = self.config.vision_sigma;
        let ids: Vec<String> = self.truth.keys().cloned().collect();
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let (dx, dy) = if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma).expect("finite sigma");
                let mut r = self.rng.stream(Channel::Vision, &id);
                (normal.sample(&mut r), normal.sample(&mut r))
            } else {
                (0.0, 0.0)
            };
            let (ox, oy) = match self.scripted(&id, |k| matches!(k, FaultKind::DetectionOffset { .. })) {
                Some(FaultKind::DetectionOffset { dx, dy }) => (dx, dy),
                _ => (0.0, 0.0),
            };
            let t = &self.truth[&id];
            out.push((id, t.x + dx + ox, t.y + dy + oy, t.depth));
        }
        out
    }

    /// Decide, once per hole, whether its first feed meets a blockage.
    pub fn decide_blockage(&mut self, hole: &str) {
        if self.blockages.contains_key(hole) {
            return;
        }
        let depth = self.hole_depth_mm(hole);
        let decision = match self.scripted(hole, |k| matches!(k, FaultKind::HoseBlockage { .. })) {
            Some(FaultKind::HoseBlockage { at_depth, persistent }) => {
                Some(Blockage { at_mm: mm(at_depth).min(depth), persistent, cleared: false })
            }
            _ => {
                let p = self.faults.p_hose_blockage_per_hole;
                if self.rng.bernoulli(Channel::Blockage, hole, p) {
                    use rand::Rng;
                    let frac = self.rng.stream(Channel::Blockage, hole).random_range(0.3..0.9);
                    Some(Blockage { at_mm: (depth as f64 * frac) as u32, persistent: false, cleared: false })
                } else {
                    None
                }
            }
        };
        self.blockages.insert(hole.to_string(), decision);
    }

    pub fn snapshot(&self) -> SimSnapshot {
        SimSnapshot { version: SNAPSHOT_VERSION, world: self.clone() }
    }

    pub fn restore(snapshot: SimSnapshot) -> Result<SimWorld, SimError> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(SimError::IncompatibleSnapshotVersion { found: snapshot.version, expected: SNAPSHOT_VERSION });
        }
        Ok(snapshot.world)
    }

    pub fn state_hash(&self) -> String {
        hash_json(self)
    }

    pub fn total_pumped_g(&self) -> u64 {
        self.pumped_g.values().sum()
    }
}

pub(crate) fn hash_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("state serializes");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSnapshot {
    pub version: u32,
    pub world: SimWorld,
}

impl SimSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }

    /// Checks the version before decoding the world, so a snapshot from a
    /// future layout reports its version rather than a decode error.
    pub fn from_json(text: &str) -> Result<SimSnapshot, SimError> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SimError::MalformedSnapshot(e.to_string()))?;
        let version = raw
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| SimError::MalformedSnapshot("missing version".into()))? as u32;
        if version != SNAPSHOT_VERSION {
            return Err(SimError::IncompatibleSnapshotVersion { found: version, expected: SNAPSHOT_VERSION });
        }
        serde_json::from_value(raw).map_err(|e| SimError::MalformedSnapshot(e.to_string()))
    }
}
