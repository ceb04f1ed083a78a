use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Motion durations and process rates. Times are in ticks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub scan_ticks: u64,
    pub detect_ticks: u64,
    pub boom_ticks: u64,
    pub position_ticks: u64,
    pub sweep_ticks: u64,
    pub assemble_ticks: u64,
    pub insert_ticks: u64,
    pub handover_ticks: u64,
    pub wiggle_ticks: u64,
    /// Hose feed and retract speeds, mm per tick.
    pub feed_rate_mm: u32,
    pub retract_rate_mm: u32,
    pub hose_max_mm: u32,
    /// Emulsion pump rate, grams per tick.
    pub pump_rate_g: u64,
    /// Side of the square boom working region, meters.
    pub boom_region_size: f64,
    /// PositionAtHole fails when the pose estimate is farther than this from truth.
    pub position_tolerance: f64,
    /// Standard deviation of simulated vision noise per axis, meters.
    pub vision_sigma: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scan_ticks: 30,
            detect_ticks: 20,
            boom_ticks: 25,
            position_ticks: 10,
            sweep_ticks: 30,
            assemble_ticks: 20,
            insert_ticks: 8,
            handover_ticks: 6,
            wiggle_ticks: 8,
            feed_rate_mm: 500,
            retract_rate_mm: 1000,
            hose_max_mm: 8000,
            pump_rate_g: 250,
            boom_region_size: 2.0,
            position_tolerance: 0.03,
            vision_sigma: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    /// First matching decision at or after this tick, on any hole.
    Tick(u64),
    /// First matching decision concerning this hole.
    Hole(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultKind {
    /// The next approach to the hole does not find it.
    HoleNotFound,
    SweepOutcome { success: bool },
    /// The hose jams at this depth (m). A persistent blockage never clears.
    HoseBlockage { at_depth: f64, persistent: bool },
    WiggleOutcome { clears: bool },
    /// The primed detonator is dropped while being seated in the hose tip.
    DetonatorDrop,
    /// Vision reports the hole displaced by this much (m).
    DetectionOffset { dx: f64, dy: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptedFault {
    pub trigger: Trigger,
    #[serde(flatten)]
    pub kind: FaultKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultConfig {
    pub p_hole_not_found_at_approach: f64,
    pub p_sweep_recovery_success: f64,
    pub p_hose_blockage_per_hole: f64,
    pub p_wiggle_clears_blockage: f64,
    pub p_detonator_drop: f64,
    pub scripted_faults: Vec<ScriptedFault>,
}

impl Default for FaultConfig {
    fn default() -> Self {
        FaultConfig {
            p_hole_not_found_at_approach: 0.0,
            p_sweep_recovery_success: 0.9,
            p_hose_blockage_per_hole: 0.0,
            p_wiggle_clears_blockage: 0.8,
            p_detonator_drop: 0.0,
            scripted_faults: Vec::new(),
        }
    }
}

impl FaultConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let probs = [
            ("p_hole_not_found_at_approach", self.p_hole_not_found_at_approach),
            ("p_sweep_recovery_success", self.p_sweep_recovery_success),
            ("p_hose_blockage_per_hole", self.p_hose_blockage_per_hole),
            ("p_wiggle_clears_blockage", self.p_wiggle_clears_blockage),
            ("p_detonator_drop", self.p_detonator_drop),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidScenario(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioHole {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

fn default_detonators() -> u32 {
    100
}

/// Scenario file: the face, its ground-truth holes, faults and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub face: Face,
    pub holes: Vec<ScenarioHole>,
    #[serde(default)]
    pub fault_config: FaultConfig,
    pub seed: u64,
    #[serde(default = "default_detonators")]
    pub detonators: u32,
    #[serde(default)]
    pub sim: SimConfig,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, SimError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.fault_config.validate()?;
        if !(self.face.w > 0.0 && self.face.h > 0.0) {
            return Err(SimError::InvalidScenario("face dimensions must be positive".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for h in &self.holes {
            if !ids.insert(&h.id) {
                return Err(SimError::InvalidScenario(format!("hole `{}` listed twice", h.id)));
            }
            if !(h.depth > 0.0) || (h.depth * 1000.0) as u64 > self.sim.hose_max_mm as u64 {
                return Err(SimError::InvalidScenario(format!("hole `{}` depth {} out of range", h.id, h.depth)));
            }
            if !(0.0..=self.face.w).contains(&h.x) || !(0.0..=self.face.h).contains(&h.y) {
                return Err(SimError::InvalidScenario(format!("hole `{}` lies outside the face", h.id)));
            }
        }
        Ok(())
    }

    /// A regular grid of holes, `cols` per row, bottom row first.
    pub fn grid(rows: usize, cols: usize, seed: u64) -> Scenario {
        let holes = (0..rows * cols)
            .map(|i| ScenarioHole {
                id: format!("H{:02}", i + 1),
                x: 0.5 + (i % cols) as f64 * 0.9,
                y: 0.5 + (i / cols) as f64 * 0.8,
                depth: 3.0 + (i % 3) as f64 * 0.5,
            })
            .collect();
        Scenario {
            face: Face { w: 1.0 + cols as f64 * 0.9, h: 1.0 + rows as f64 * 0.8 },
            holes,
            fault_config: FaultConfig {
                p_sweep_recovery_success: 1.0,
                p_wiggle_clears_blockage: 1.0,
                ..FaultConfig::default()
            },
            seed,
            detonators: default_detonators(),
            sim: SimConfig::default(),
        }
    }
}
