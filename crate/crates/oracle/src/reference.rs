use std::collections::{BTreeSet, HashMap};

use rockcharge_core::{DecoratorKind, NodeKind, Status, TreeNode};

use crate::scripted::ScriptedLeaves;

#[derive(Clone, Debug, Default)]
struct NodeMemo {
    active: bool,
    resume_at: usize,
    done: BTreeSet<usize>,
    failures: u32,
}

/// Result of one reference tick.
#[derive(Clone, Debug, PartialEq)]
pub struct RefTick {
    pub status: Status,
    pub visited: Vec<(String, Status)>,
    pub preempted: Vec<String>,
}

/// Straightforward recursive step interpreter, state keyed by node id.
pub struct ReferenceInterpreter {
    root: TreeNode,
    memo: HashMap<String, NodeMemo>,
    visited: Vec<(String, Status)>,
    preempted: Vec<String>,
}

impl ReferenceInterpreter {
    pub fn new(root: &TreeNode) -> Self {
        ReferenceInterpreter {
            root: root.clone(),
            memo: HashMap::new(),
            visited: Vec::new(),
            preempted: Vec::new(),
        }
    }

    pub fn tick(&mut self, leaves: &mut ScriptedLeaves) -> RefTick {
        self.visited.clear();
        self.preempted.clear();
        let root = self.root.clone();
        let status = self.step(&root, leaves);
        RefTick {
            status,
            visited: std::mem::take(&mut self.visited),
            preempted: std::mem::take(&mut self.preempted),
        }
    }

    fn memo(&mut self, n: &TreeNode) -> &mut NodeMemo {
        self.memo.entry(n.id.to_string()).or_default()
    }

    fn step(&mut self, n: &TreeNode, leaves: &mut ScriptedLeaves) -> Status {
        let slot = self.visited.len();
        self.visited.push((n.id.to_string(), Status::Running));
        let kids = &n.children;
        let result = match &n.kind {
            NodeKind::Condition { .. } => leaves.call("check", n.id.as_str()),
            NodeKind::Action { .. } => {
                let verb = if self.memo(n).active { "poll" } else { "start" };
                leaves.call(verb, n.id.as_str())
            }
            NodeKind::Sequence { memory: false } | NodeKind::Fallback { memory: false } => {
                // Sequence continues on Success, Fallback on Failure.
                let cont = if let NodeKind::Sequence { .. } = n.kind {
                    Status::Success
                } else {
                    Status::Failure
                };
                let mut out = cont;
                let mut i = 0;
                while i < kids.len() {
                    let s = self.step(&kids[i], leaves);
                    if s != cont {
                        out = s;
                        for later in &kids[i + 1..] {
                            self.abort(later, leaves);
                        }
                        break;
                    }
                    i += 1;
                }
                out
            }
            NodeKind::Sequence { memory: true } | NodeKind::Fallback { memory: true } => {
                let cont = if let NodeKind::Sequence { .. } = n.kind {
                    Status::Success
                } else {
                    Status::Failure
                };
                let mut i = self.memo(n).resume_at;
                let mut out = cont;
                while i < kids.len() {
                    let s = self.step(&kids[i], leaves);
                    if s == cont {
                        i += 1;
                        continue;
                    }
                    if s == Status::Running {
                        self.memo(n).resume_at = i;
                    } else {
                        for later in &kids[i + 1..] {
                            self.abort(later, leaves);
                        }
                    }
                    out = s;
                    break;
                }
                out
            }
            NodeKind::Parallel { success_threshold } => {
                let need = success_threshold.required(kids.len());
                let mut out = Status::Running;
                for i in 0..kids.len() {
                    if self.memo(n).done.contains(&i) {
                        continue;
                    }
                    let s = self.step(&kids[i], leaves);
                    if s == Status::Success {
                        self.memo(n).done.insert(i);
                        if self.memo(n).done.len() >= need {
                            out = Status::Success;
                        }
                    } else if s == Status::Failure {
                        out = Status::Failure;
                    }
                    if out != Status::Running {
                        for k in kids {
                            self.abort(k, leaves);
                        }
                        break;
                    }
                }
                out
            }
            NodeKind::Decorator(DecoratorKind::Inverter) => match self.step(&kids[0], leaves) {
                Status::Success => Status::Failure,
                Status::Failure => Status::Success,
                Status::Running => Status::Running,
            },
            NodeKind::Decorator(DecoratorKind::LoopBody) => {
                let s = self.step(&kids[0], leaves);
                if s == Status::Success {
                    self.abort(&kids[0], leaves);
                    Status::Running
                } else {
                    s
                }
            }
            NodeKind::Decorator(DecoratorKind::RetryUntilSuccessful { max_attempts }) => {
                let s = self.step(&kids[0], leaves);
                if s != Status::Failure {
                    s
                } else {
                    let failures = self.memo(n).failures + 1;
                    if failures < *max_attempts {
                        self.abort(&kids[0], leaves);
                        self.memo(n).failures = failures;
                        Status::Running
                    } else {
                        Status::Failure
                    }
                }
            }
        };
        if result == Status::Running {
            self.memo(n).active = true;
        } else {
            self.memo.remove(n.id.as_str());
        }
        self.visited[slot].1 = result;
        result
    }

    /// Halt a subtree: children left to right, then the node itself.
    fn abort(&mut self, n: &TreeNode, leaves: &mut ScriptedLeaves) {
        for k in &n.children {
            self.abort(k, leaves);
        }
        let was_active = self.memo.remove(n.id.as_str()).is_some_and(|m| m.active);
        if was_active && matches!(n.kind, NodeKind::Action { .. }) {
            leaves.halt(n.id.as_str());
            self.preempted.push(n.id.to_string());
        }
    }
}
