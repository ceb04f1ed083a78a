use rockcharge_core::{NodeId, NodeKind, Status, TickTrace, TreeNode};
use rockcharge_mission::HoleId;
use serde::{Deserialize, Serialize};

use crate::phase::{Phase, ResolutionKind};

/// Raised once for every phase-tree Failure; the tree stays stopped until
/// the operator picks one of `resolutions`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssistancePrompt {
    pub phase: Phase,
    pub node_id: NodeId,
    pub label: String,
    /// Leaf whose Failure started the cascade.
    pub leaf_id: Option<NodeId>,
    pub hole: Option<HoleId>,
    pub reason: Option<String>,
    pub resolutions: Vec<ResolutionKind>,
}

impl AssistancePrompt {
    pub fn offers(&self, kind: ResolutionKind) -> bool {
        self.resolutions.contains(&kind)
    }
}

/// Where a failed tick failed: the deepest goal-guarded Fallback on the
/// failure path (its goal could not be achieved) and the failing leaf.
#[derive(Debug, PartialEq)]
pub struct FailurePoint<'t> {
    pub goal: Option<&'t TreeNode>,
    pub leaf: &'t TreeNode,
}

impl<'t> FailurePoint<'t> {
    /// The node an operator should see.
    pub fn node(&self) -> &'t TreeNode {
        self.goal.unwrap_or(self.leaf)
    }
}

fn last_status(trace: &TickTrace, id: &NodeId) -> Option<Status> {
    trace.entries.iter().rev().find(|e| &e.node_id == id).map(|e| e.status)
}

fn goal_guarded(node: &TreeNode) -> bool {
    matches!(node.kind, NodeKind::Fallback { .. })
        && node
            .children
            .first()
            .is_some_and(|c| matches!(c.kind, NodeKind::Condition { .. }))
}

pub fn locate_failure<'t>(tree: &'t TreeNode, trace: &TickTrace) -> FailurePoint<'t> {
    let mut goal = None;
    let mut node = tree;
    loop {
        if goal_guarded(node) {
            goal = Some(node);
        }
        let next = node
            .children
            .iter()
            .rfind(|c| last_status(trace, &c.id) == Some(Status::Failure));
        match next {
            Some(child) => node = child,
            None => return FailurePoint { goal, leaf: node },
        }
    }
}
