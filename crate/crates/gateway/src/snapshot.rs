//! Snapshot files. Each is written to a temporary name and renamed into
//! place, then the `LATEST` pointer is replaced the same way, so a killed
//! process leaves either the old or the new snapshot, never a torn one.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rockcharge_core::Blackboard;
use rockcharge_fsm::{AssistancePrompt, OrchestratorState, Phase};
use rockcharge_mission::Worksite;
use rockcharge_sim::{Rig, SimSnapshot, SimWorld};
use serde::{Deserialize, Serialize};

use crate::error::GatewayError;

pub const SNAPSHOT_FORMAT: u32 = 1;
const LATEST: &str = "LATEST";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotFile {
    pub format: u32,
    pub config_hash: String,
    pub seq: u64,
    pub phase: Phase,
    pub paused: bool,
    pub prompt: Option<AssistancePrompt>,
    pub tree_finished: bool,
    pub ticks: u64,
    pub blackboard: Blackboard,
    pub site: Worksite,
    pub world: SimSnapshot,
}

impl SnapshotFile {
    pub fn capture(state: &OrchestratorState, config_hash: &str, seq: u64) -> Self {
        SnapshotFile {
            format: SNAPSHOT_FORMAT,
            config_hash: config_hash.to_string(),
            seq,
            phase: state.phase,
            paused: state.paused,
            prompt: state.prompt.clone(),
            tree_finished: state.tree_finished,
            ticks: state.ticks,
            blackboard: state.blackboard.clone(),
            site: state.rig.site.clone(),
            world: state.rig.world.snapshot(),
        }
    }

    pub fn into_state(self, path: &str) -> Result<OrchestratorState, GatewayError> {
        let world = SimWorld::restore(self.world).map_err(|e| GatewayError::MalformedSnapshot {
            path: path.to_string(),
            reason: e.to_string(),
        })?;
        Ok(OrchestratorState {
            phase: self.phase,
            paused: self.paused,
            prompt: self.prompt,
            tree_finished: self.tree_finished,
            ticks: self.ticks,
            blackboard: self.blackboard,
            rig: Rig { world, site: self.site },
        })
    }

    pub fn file_name(&self) -> String {
        format!("snapshot-{:012}-{:012}.json", self.ticks, self.seq)
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, dir.join(name))
}

/// Write `snap` into `dir` and point `LATEST` at it. Returns the file name.
pub fn save(dir: &Path, snap: &SnapshotFile) -> Result<String, GatewayError> {
    fs::create_dir_all(dir)?;
    let name = snap.file_name();
    let json = serde_json::to_vec_pretty(snap).expect("snapshots serialize");
    write_atomic(dir, &name, &json)?;
    write_atomic(dir, LATEST, name.as_bytes())?;
    Ok(name)
}

/// Resolve `reference` (`latest`, a file name in `dir`, or a path).
pub fn resolve(dir: Option<&Path>, reference: &str) -> Result<PathBuf, GatewayError> {
    let missing = || GatewayError::SnapshotNotFound(reference.to_string());
    if reference == "latest" {
        let dir = dir.ok_or_else(missing)?;
        let name = fs::read_to_string(dir.join(LATEST)).map_err(|_| missing())?;
        let path = dir.join(name.trim());
        return if path.is_file() { Ok(path) } else { Err(missing()) };
    }
    let direct = PathBuf::from(reference);
    if direct.is_file() {
        return Ok(direct);
    }
    match dir.map(|d| d.join(reference)) {
        Some(p) if p.is_file() => Ok(p),
        _ => Err(missing()),
    }
}

pub fn load(path: &Path) -> Result<SnapshotFile, GatewayError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|_| GatewayError::SnapshotNotFound(shown.clone()))?;
    let snap: SnapshotFile = serde_json::from_str(&text).map_err(|e| GatewayError::MalformedSnapshot {
        path: shown.clone(),
        reason: e.to_string(),
    })?;
    if snap.format != SNAPSHOT_FORMAT {
        return Err(GatewayError::MalformedSnapshot {
            path: shown,
            reason: format!("format {} (expected {SNAPSHOT_FORMAT})", snap.format),
        });
    }
    Ok(snap)
}
