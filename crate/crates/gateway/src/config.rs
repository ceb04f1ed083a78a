use std::path::{Path, PathBuf};

use rockcharge_core::dsl::{self, Severity, TreeDocument};
use rockcharge_core::BehaviorRegistry;
use rockcharge_mission::trees::{build_mission_trees, load_tree_dir};
use rockcharge_sim::{Rig, Scenario};
use sha2::{Digest, Sha256};

use crate::error::GatewayError;

pub const DEMO_SCENARIO: &str = include_str!("../assets/demo_scenario.json");
pub const DEMO_SCRIPT: &str = include_str!("../assets/demo_script.json");

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub scenario: Scenario,
    pub trees: TreeDocument,
    pub snapshot_dir: Option<PathBuf>,
    /// Periodic snapshot cadence in ticks; 0 disables it.
    pub snapshot_every: u64,
    /// Heartbeat cadence in ticks; 0 disables it.
    pub heartbeat_every: u64,
}

impl ServiceConfig {
    pub fn new(scenario: Scenario, trees: TreeDocument) -> Self {
        ServiceConfig {
            scenario,
            trees,
            snapshot_dir: None,
            snapshot_every: 100,
            heartbeat_every: 100,
        }
    }

    pub fn demo() -> Self {
        ServiceConfig::new(demo_scenario(), build_mission_trees())
    }

    /// Identity of everything a snapshot depends on besides its own state.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(dsl::serialize(&self.trees).as_bytes());
        h.update(b"\n");
        h.update(self.scenario.to_json().as_bytes());
        hex::encode(h.finalize())
    }
}

pub fn demo_scenario() -> Scenario {
    Scenario::from_json(DEMO_SCENARIO).expect("demo scenario is valid")
}

pub fn load_scenario(path: &Path) -> Result<Scenario, GatewayError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GatewayError::InvalidScenario(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| GatewayError::InvalidScenario(format!("{}: {e}", path.display())))
}

/// Built-in trees, or every `.tree.xml` in `dir`.
pub fn load_trees(dir: Option<&Path>) -> Result<TreeDocument, GatewayError> {
    match dir {
        None => Ok(build_mission_trees()),
        Some(dir) => load_tree_dir(dir).map_err(|e| GatewayError::TreeLoad(e.to_string())),
    }
}

/// Refuse documents with validation errors or leaves nobody implements.
pub fn check_trees(doc: &TreeDocument, registry: &BehaviorRegistry<Rig>) -> Result<(), GatewayError> {
    let mut errors: Vec<_> = dsl::validate(doc)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    for (name, tree) in &doc.trees {
        for node in tree.iter() {
            let behavior = match &node.kind {
                rockcharge_core::NodeKind::Action { behavior, .. }
                | rockcharge_core::NodeKind::Condition { behavior, .. } => behavior,
                _ => continue,
            };
            if registry.kind_of(behavior).is_none() {
                errors.push(dsl::Diagnostic {
                    severity: Severity::Error,
                    code: dsl::DiagnosticCode::UnknownBehavior,
                    tree: name.clone(),
                    node_id: node.id.clone(),
                    message: format!("no implementation registered for `{behavior}`"),
                });
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(GatewayError::TreeValidationFailed(errors))
    }
}
