//! Tick propagation, halting and per-node execution state.

use serde::{Deserialize, Serialize};

use crate::blackboard::Blackboard;
use crate::error::BtError;
use crate::registry::{BehaviorRegistry, Handler, Leaf, LeafKind};
use crate::status::Status;
use crate::tree::{DecoratorKind, NodeId, NodeKind, TreeNode};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub node_id: NodeId,
    pub status: Status,
}

/// What happened during one root tick.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickTrace {
    pub tick: u64,
    /// Visited nodes in depth-first pre-order.
    pub entries: Vec<TraceEntry>,
    /// Actions that received a preemption signal, in delivery order.
    pub preempted: Vec<NodeId>,
    pub blackboard_keys: Vec<String>,
}

impl TickTrace {
    pub fn status_of(&self, id: &str) -> Option<Status> {
        self.entries
            .iter()
            .find(|e| e.node_id.as_str() == id)
            .map(|e| e.status)
    }

    pub fn visited(&self, id: &str) -> bool {
        self.entries.iter().any(|e| e.node_id.as_str() == id)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
struct NodeState {
    running: bool,
    memory_index: usize,
    succeeded: Vec<bool>,
    attempts: u32,
}

impl NodeState {
    fn clear(&mut self) {
        *self = NodeState::default();
    }
}

/// Mutable execution state for one tree, indexed by pre-order position.
#[derive(Clone, Debug)]
pub struct TreeRuntime {
    ids: Vec<NodeId>,
    sizes: Vec<usize>,
    states: Vec<NodeState>,
    tick_count: u64,
}

impl TreeRuntime {
    pub fn new(tree: &TreeNode) -> Result<Self, BtError> {
        tree.check_structure()?;
        let mut ids = Vec::new();
        let mut sizes = Vec::new();
        layout(tree, &mut ids, &mut sizes);
        let states = vec![NodeState::default(); ids.len()];
        Ok(TreeRuntime {
            ids,
            sizes,
            states,
            tick_count: 0,
        })
    }

    pub fn tick_count(&self) -> u64 {
        self.tick_count
    }

    /// Ids of nodes currently in the Running state, in pre-order.
    pub fn running_nodes(&self) -> Vec<&NodeId> {
        self.ids
            .iter()
            .zip(&self.states)
            .filter(|(_, s)| s.running)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn is_idle(&self) -> bool {
        self.states.iter().all(|s| *s == NodeState::default())
    }

    pub fn is_running(&self, id: &NodeId) -> bool {
        self.index_of(id).is_some_and(|i| self.states[i].running)
    }

    /// Forget all execution state without notifying leaves. The tick
    /// counter is preserved.
    pub fn reset(&mut self) {
        self.states.iter_mut().for_each(NodeState::clear);
    }

    /// Tick the root once.
    pub fn tick<C>(
        &mut self,
        tree: &TreeNode,
        blackboard: &mut Blackboard,
        registry: &mut BehaviorRegistry<C>,
        ctx: &mut C,
    ) -> Result<(Status, TickTrace), BtError> {
        self.check_tree(tree)?;
        check_leaves(tree, registry)?;
        blackboard.take_touched();
        self.tick_count += 1;
        let mut exec = Exec {
            sizes: &self.sizes,
            states: &mut self.states,
            bb: blackboard,
            registry,
            ctx,
            entries: Vec::new(),
            preempted: Vec::new(),
        };
        let status = exec.tick(tree, 0)?;
        let trace = TickTrace {
            tick: self.tick_count,
            entries: exec.entries,
            preempted: exec.preempted,
            blackboard_keys: blackboard.take_touched().into_iter().collect(),
        };
        Ok((status, trace))
    }

    /// Halt the subtree rooted at `node_id`. Every Running action in it
    /// receives one preemption signal; returns their ids in delivery order.
    pub fn halt<C>(
        &mut self,
        tree: &TreeNode,
        node_id: &NodeId,
        blackboard: &mut Blackboard,
        registry: &mut BehaviorRegistry<C>,
        ctx: &mut C,
    ) -> Result<Vec<NodeId>, BtError> {
        self.check_tree(tree)?;
        let idx = self
            .index_of(node_id)
            .ok_or_else(|| BtError::UnknownNodeId(node_id.clone()))?;
        let node = tree
            .find(node_id)
            .ok_or_else(|| BtError::UnknownNodeId(node_id.clone()))?;
        let mut exec = Exec {
            sizes: &self.sizes,
            states: &mut self.states,
            bb: blackboard,
            registry,
            ctx,
            entries: Vec::new(),
            preempted: Vec::new(),
        };
        exec.halt(node, idx);
        Ok(exec.preempted)
    }

    fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    fn check_tree(&self, tree: &TreeNode) -> Result<(), BtError> {
        let mut n = 0;
        for (i, node) in tree.iter().enumerate() {
            if self.ids.get(i) != Some(&node.id) {
                return Err(BtError::RuntimeMismatch);
            }
            n += 1;
        }
        if n != self.ids.len() {
            return Err(BtError::RuntimeMismatch);
        }
        Ok(())
    }
}

/// Tick `tree` once. Convenience wrapper over [`TreeRuntime::tick`].
pub fn tick_root<C>(
    tree: &TreeNode,
    runtime: &mut TreeRuntime,
    blackboard: &mut Blackboard,
    registry: &mut BehaviorRegistry<C>,
    ctx: &mut C,
) -> Result<(Status, TickTrace), BtError> {
    runtime.tick(tree, blackboard, registry, ctx)
}

fn layout(node: &TreeNode, ids: &mut Vec<NodeId>, sizes: &mut Vec<usize>) -> usize {
    let at = ids.len();
    ids.push(node.id.clone());
    sizes.push(0);
    let mut size = 1;
    for child in &node.children {
        size += layout(child, ids, sizes);
    }
    sizes[at] = size;
    size
}

fn check_leaves<C>(tree: &TreeNode, registry: &BehaviorRegistry<C>) -> Result<(), BtError> {
    for node in tree.iter() {
        let (behavior, expected) = match &node.kind {
            NodeKind::Action { behavior, .. } => (behavior, LeafKind::Action),
            NodeKind::Condition { behavior, .. } => (behavior, LeafKind::Condition),
            _ => continue,
        };
        match registry.kind_of(behavior) {
            None => {
                return Err(BtError::UnregisteredBehavior {
                    node_id: node.id.clone(),
                    behavior: behavior.clone(),
                })
            }
            Some(kind) if kind != expected => {
                return Err(BtError::BehaviorKindMismatch {
                    node_id: node.id.clone(),
                    behavior: behavior.clone(),
                    registered: kind.as_str(),
                    expected: expected.as_str(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

struct Exec<'e, C> {
    sizes: &'e [usize],
    states: &'e mut [NodeState],
    bb: &'e mut Blackboard,
    registry: &'e mut BehaviorRegistry<C>,
    ctx: &'e mut C,
    entries: Vec<TraceEntry>,
    preempted: Vec<NodeId>,
}

/// Pre-order indices of the children of the node at `idx`.
fn child_indices(sizes: &[usize], node: &TreeNode, idx: usize) -> Vec<usize> {
    let mut next = idx + 1;
    node.children
        .iter()
        .map(|_| {
            let at = next;
            next += sizes[at];
            at
        })
        .collect()
}

impl<C> Exec<'_, C> {
    fn tick(&mut self, node: &TreeNode, idx: usize) -> Result<Status, BtError> {
        let slot = self.entries.len();
        self.entries.push(TraceEntry {
            node_id: node.id.clone(),
            status: Status::Running,
        });
        let status = match &node.kind {
            NodeKind::Action { behavior, .. } => self.tick_action(node, behavior, idx),
            NodeKind::Condition { behavior, .. } => self.tick_condition(node, behavior),
            NodeKind::Sequence { memory: false } => self.tick_reactive(node, idx, Status::Success),
            NodeKind::Fallback { memory: false } => self.tick_reactive(node, idx, Status::Failure),
            NodeKind::Sequence { memory: true } => self.tick_memory(node, idx, Status::Success),
            NodeKind::Fallback { memory: true } => self.tick_memory(node, idx, Status::Failure),
            NodeKind::Parallel { success_threshold } => {
                let required = success_threshold.required(node.children.len());
                self.tick_parallel(node, idx, required)
            }
            NodeKind::Decorator(kind) => self.tick_decorator(node, idx, *kind),
        }?;
        let state = &mut self.states[idx];
        if status.is_running() {
            state.running = true;
        } else {
            state.clear();
        }
        self.entries[slot].status = status;
        Ok(status)
    }

    fn leaf_call<R>(
        &mut self,
        node: &TreeNode,
        behavior: &str,
        f: impl FnOnce(&mut Handler<C>, &mut Leaf<'_, C>) -> R,
    ) -> Result<R, BtError> {
        let ports = match &node.kind {
            NodeKind::Action { ports, .. } | NodeKind::Condition { ports, .. } => ports,
            _ => unreachable!("leaf_call on control node"),
        };
        let handler =
            self.registry
                .get_mut(behavior)
                .ok_or_else(|| BtError::UnregisteredBehavior {
                    node_id: node.id.clone(),
                    behavior: behavior.to_string(),
                })?;
        let mut leaf = Leaf {
            node_id: &node.id,
            label: &node.label,
            ports,
            blackboard: self.bb,
            ctx: self.ctx,
        };
        Ok(f(handler, &mut leaf))
    }

    fn tick_action(&mut self, node: &TreeNode, behavior: &str, idx: usize) -> Result<Status, BtError> {
        let first = !self.states[idx].running;
        self.leaf_call(node, behavior, |handler, leaf| match handler {
            Handler::Action(a) if first => a.start(leaf),
            Handler::Action(a) => a.poll(leaf),
            Handler::Condition(_) => unreachable!("kinds checked before ticking"),
        })
    }

    fn tick_condition(&mut self, node: &TreeNode, behavior: &str) -> Result<Status, BtError> {
        let status = self.leaf_call(node, behavior, |handler, leaf| match handler {
            Handler::Condition(c) => c.check(leaf),
            Handler::Action(_) => unreachable!("kinds checked before ticking"),
        })?;
        if status.is_running() {
            return Err(BtError::ConditionReturnedRunning {
                node_id: node.id.clone(),
            });
        }
        Ok(status)
    }

    /// Reactive Sequence (`pass` = Success) or Fallback (`pass` = Failure):
    /// every tick starts from the first child.
    fn tick_reactive(&mut self, node: &TreeNode, idx: usize, pass: Status) -> Result<Status, BtError> {
        let children = child_indices(self.sizes, node, idx);
        for (i, &cidx) in children.iter().enumerate() {
            let status = self.tick(&node.children[i], cidx)?;
            if status != pass {
                self.halt_after(node, &children, i);
                return Ok(status);
            }
        }
        Ok(pass)
    }

    /// Memory variant: resumes from the stored child index.
    fn tick_memory(&mut self, node: &TreeNode, idx: usize, pass: Status) -> Result<Status, BtError> {
        let children = child_indices(self.sizes, node, idx);
        let start = self.states[idx].memory_index;
        for (i, &cidx) in children.iter().enumerate().skip(start) {
            let status = self.tick(&node.children[i], cidx)?;
            if status == pass {
                self.states[idx].memory_index = i + 1;
                continue;
            }
            if status.is_running() {
                self.states[idx].memory_index = i;
            } else {
                self.halt_after(node, &children, i);
            }
            return Ok(status);
        }
        Ok(pass)
    }

    fn tick_parallel(&mut self, node: &TreeNode, idx: usize, required: usize) -> Result<Status, BtError> {
        let children = child_indices(self.sizes, node, idx);
        if self.states[idx].succeeded.len() != children.len() {
            self.states[idx].succeeded = vec![false; children.len()];
        }
        for (i, &cidx) in children.iter().enumerate() {
            if self.states[idx].succeeded[i] {
                continue;
            }
            match self.tick(&node.children[i], cidx)? {
                Status::Running => {}
                Status::Success => {
                    self.states[idx].succeeded[i] = true;
                    let done = self.states[idx].succeeded.iter().filter(|s| **s).count();
                    if done >= required {
                        self.halt_children(node, &children);
                        return Ok(Status::Success);
                    }
                }
                Status::Failure => {
                    self.halt_children(node, &children);
                    return Ok(Status::Failure);
                }
            }
        }
        Ok(Status::Running)
    }

    fn tick_decorator(&mut self, node: &TreeNode, idx: usize, kind: DecoratorKind) -> Result<Status, BtError> {
        let cidx = idx + 1;
        let child = &node.children[0];
        let status = self.tick(child, cidx)?;
        Ok(match kind {
            DecoratorKind::Inverter => status.invert(),
            DecoratorKind::LoopBody => {
                if status == Status::Success {
                    self.halt(child, cidx);
                    Status::Running
                } else {
                    status
                }
            }
            DecoratorKind::RetryUntilSuccessful { max_attempts } => match status {
                Status::Failure => {
                    let attempts = self.states[idx].attempts + 1;
                    if attempts >= max_attempts {
                        Status::Failure
                    } else {
                        self.halt(child, cidx);
                        self.states[idx].attempts = attempts;
                        Status::Running
                    }
                }
                other => other,
            },
        })
    }

    fn halt_after(&mut self, node: &TreeNode, children: &[usize], i: usize) {
        for (j, &cidx) in children.iter().enumerate().skip(i + 1) {
            self.halt(&node.children[j], cidx);
        }
    }

    fn halt_children(&mut self, node: &TreeNode, children: &[usize]) {
        for (j, &cidx) in children.iter().enumerate() {
            self.halt(&node.children[j], cidx);
        }
    }

    fn halt(&mut self, node: &TreeNode, idx: usize) {
        let children = child_indices(self.sizes, node, idx);
        self.halt_children(node, &children);
        let was_running = self.states[idx].running;
        self.states[idx].clear();
        if let (true, NodeKind::Action { behavior, .. }) = (was_running, &node.kind) {
            let delivered = self.leaf_call(node, behavior, |handler, leaf| {
                if let Handler::Action(a) = handler {
                    a.halt(leaf);
                }
            });
            if delivered.is_ok() {
                self.preempted.push(node.id.clone());
            }
        }
    }
}
