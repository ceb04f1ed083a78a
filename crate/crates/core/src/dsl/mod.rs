//! The `.tree.xml` tree-definition format.
//!
//! ```xml
//! <TreeDocument format="1">
//!   <Blackboard>
//!     <Key name="current_hole" type="hole"/>
//!   </Blackboard>
//!   <Behaviors>
//!     <Action name="PopHole" ports="hole:hole"/>
//!     <Condition name="MissionQueueEmpty"/>
//!   </Behaviors>
//!   <Tree name="Charging">
//!     <Fallback id="root">
//!       <Condition id="done" name="MissionQueueEmpty"/>
//!       <Action id="pop" name="PopHole" ports="hole=current_hole"/>
//!     </Fallback>
//!   </Tree>
//! </TreeDocument>
//! ```
//!
//! Manifest ports are `port:type` pairs; node ports are `port=key` pairs.
//! Unknown elements and attributes are rejected.

mod parse;
mod serialize;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blackboard::ValueType;
use crate::registry::LeafKind;
use crate::tree::{NodeId, TreeNode};

pub use parse::parse;
pub use serialize::serialize;
pub use validate::{exit_code, validate, Diagnostic, DiagnosticCode, Severity};

pub const FORMAT_VERSION: u32 = 1;
pub const FILE_EXTENSION: &str = ".tree.xml";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorSpec {
    pub kind: SpecKind,
    /// Required port -> expected blackboard type.
    pub ports: BTreeMap<String, ValueType>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecKind {
    Action,
    Condition,
}

impl From<SpecKind> for LeafKind {
    fn from(k: SpecKind) -> Self {
        match k {
            SpecKind::Action => LeafKind::Action,
            SpecKind::Condition => LeafKind::Condition,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub format: u32,
    pub trees: BTreeMap<String, TreeNode>,
    pub blackboard: BTreeMap<String, ValueType>,
    pub behaviors: BTreeMap<String, BehaviorSpec>,
}

impl Default for TreeDocument {
    fn default() -> Self {
        TreeDocument {
            format: FORMAT_VERSION,
            trees: BTreeMap::new(),
            blackboard: BTreeMap::new(),
            behaviors: BTreeMap::new(),
        }
    }
}

impl TreeDocument {
    pub fn tree(&self, name: &str) -> Option<&TreeNode> {
        self.trees.get(name)
    }

    /// Fold `other` into `self`. Trees must not collide; shared key and
    /// behavior declarations must agree.
    pub fn merge(&mut self, other: TreeDocument) -> Result<(), DslError> {
        for (name, tree) in other.trees {
            if self.trees.contains_key(&name) {
                return Err(DslError::DuplicateTreeName { name, line: 0, column: 0 });
            }
            self.trees.insert(name, tree);
        }
        for (key, ty) in other.blackboard {
            match self.blackboard.get(&key) {
                Some(existing) if *existing != ty => {
                    return Err(DslError::Conflict(format!(
                        "blackboard key `{key}` declared as {existing} and {ty}"
                    )))
                }
                _ => {
                    self.blackboard.insert(key, ty);
                }
            }
        }
        for (name, spec) in other.behaviors {
            match self.behaviors.get(&name) {
                Some(existing) if *existing != spec => {
                    return Err(DslError::Conflict(format!(
                        "behavior `{name}` declared twice with different manifests"
                    )))
                }
                _ => {
                    self.behaviors.insert(name, spec);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{column}: {message}")]
    SyntaxError {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("{line}:{column}: duplicate tree name `{name}`")]
    DuplicateTreeName { name: String, line: u32, column: u32 },
    #[error("{line}:{column}: duplicate node id `{node_id}` in tree `{tree}`")]
    DuplicateNodeId {
        tree: String,
        node_id: NodeId,
        line: u32,
        column: u32,
    },
    #[error("unsupported format version `{found}` (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: String },
    #[error("{0}")]
    Conflict(String),
}
