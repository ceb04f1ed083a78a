//! Immutable tree structure.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::BtError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

/// Leaf port name -> blackboard key.
pub type Ports = BTreeMap<String, String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuccessThreshold {
    All,
    Count(usize),
}

impl SuccessThreshold {
    /// Number of successful children needed out of `children`.
    pub fn required(self, children: usize) -> usize {
        match self {
            SuccessThreshold::All => children,
            SuccessThreshold::Count(n) => n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoratorKind {
    Inverter,
    RetryUntilSuccessful { max_attempts: u32 },
    /// Child Success becomes Running and the child is reset, so the
    /// enclosing node re-evaluates its goal conditions on the next tick.
    LoopBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Sequence { memory: bool },
    Fallback { memory: bool },
    Parallel { success_threshold: SuccessThreshold },
    Decorator(DecoratorKind),
    Action { behavior: String, ports: Ports },
    Condition { behavior: String, ports: Ports },
}

impl NodeKind {
    pub fn is_leaf(&self) -> bool {
        matches!(self, NodeKind::Action { .. } | NodeKind::Condition { .. })
    }

    pub fn is_memory(&self) -> bool {
        matches!(
            self,
            NodeKind::Sequence { memory: true } | NodeKind::Fallback { memory: true }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Sequence { .. } => "Sequence",
            NodeKind::Fallback { .. } => "Fallback",
            NodeKind::Parallel { .. } => "Parallel",
            NodeKind::Decorator(_) => "Decorator",
            NodeKind::Action { .. } => "Action",
            NodeKind::Condition { .. } => "Condition",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn new(id: impl Into<String>, kind: NodeKind, children: Vec<TreeNode>) -> Self {
        let id = id.into();
        TreeNode {
            label: id.clone(),
            id: NodeId(id),
            kind,
            children,
        }
    }

    pub fn sequence(id: &str, children: Vec<TreeNode>) -> Self {
        Self::new(id, NodeKind::Sequence { memory: false }, children)
    }

    pub fn memory_sequence(id: &str, children: Vec<TreeNode>) -> Self {
        Self::new(id, NodeKind::Sequence { memory: true }, children)
    }

    pub fn fallback(id: &str, children: Vec<TreeNode>) -> Self {
        Self::new(id, NodeKind::Fallback { memory: false }, children)
    }

    pub fn memory_fallback(id: &str, children: Vec<TreeNode>) -> Self {
        Self::new(id, NodeKind::Fallback { memory: true }, children)
    }

    pub fn parallel(id: &str, success_threshold: SuccessThreshold, children: Vec<TreeNode>) -> Self {
        Self::new(id, NodeKind::Parallel { success_threshold }, children)
    }

    pub fn decorator(id: &str, kind: DecoratorKind, child: TreeNode) -> Self {
        Self::new(id, NodeKind::Decorator(kind), vec![child])
    }

    pub fn action(id: &str, behavior: &str) -> Self {
        Self::new(
            id,
            NodeKind::Action {
                behavior: behavior.to_string(),
                ports: Ports::new(),
            },
            vec![],
        )
    }

    pub fn condition(id: &str, behavior: &str) -> Self {
        Self::new(
            id,
            NodeKind::Condition {
                behavior: behavior.to_string(),
                ports: Ports::new(),
            },
            vec![],
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Bind a leaf port to a blackboard key. No-op on control nodes.
    pub fn with_port(mut self, port: &str, key: &str) -> Self {
        if let NodeKind::Action { ports, .. } | NodeKind::Condition { ports, .. } = &mut self.kind {
            ports.insert(port.to_string(), key.to_string());
        }
        self
    }

    /// Depth-first pre-order iteration over the subtree.
    pub fn iter(&self) -> impl Iterator<Item = &TreeNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn find(&self, id: &NodeId) -> Option<&TreeNode> {
        self.iter().find(|n| &n.id == id)
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Check the structural invariants the engine relies on.
    pub fn check_structure(&self) -> Result<(), BtError> {
        let mut seen = HashSet::new();
        for node in self.iter() {
            if !seen.insert(&node.id) {
                return Err(malformed(node, "duplicate node id"));
            }
            let n = node.children.len();
            match &node.kind {
                NodeKind::Action { .. } | NodeKind::Condition { .. } if n != 0 => {
                    return Err(malformed(node, "leaf nodes cannot have children"));
                }
                NodeKind::Decorator(kind) => {
                    if n != 1 {
                        return Err(malformed(node, "decorator needs exactly one child"));
                    }
                    if let DecoratorKind::RetryUntilSuccessful { max_attempts: 0 } = kind {
                        return Err(malformed(node, "max_attempts must be at least 1"));
                    }
                }
                NodeKind::Sequence { .. } | NodeKind::Fallback { .. } if n == 0 => {
                    return Err(malformed(node, "control node without children"));
                }
                NodeKind::Parallel { success_threshold } => {
                    if n == 0 {
                        return Err(malformed(node, "control node without children"));
                    }
                    let required = success_threshold.required(n);
                    if required == 0 || required > n {
                        return Err(malformed(
                            node,
                            &format!("success_threshold {required} over {n} children"),
                        ));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn malformed(node: &TreeNode, reason: &str) -> BtError {
    BtError::MalformedTree {
        node_id: node.id.clone(),
        reason: reason.to_string(),
    }
}
