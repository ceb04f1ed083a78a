use std::collections::BTreeMap;

use rockcharge_core::{ActionBehavior, BehaviorRegistry, Leaf, Status};

/// Statuses a leaf returns on successive calls; wraps around when exhausted.
#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub statuses: Vec<Status>,
    pub cursor: usize,
}

impl Script {
    pub fn new(statuses: Vec<Status>) -> Self {
        assert!(!statuses.is_empty());
        Script { statuses, cursor: 0 }
    }

    fn next(&mut self) -> Status {
        let s = self.statuses[self.cursor % self.statuses.len()];
        self.cursor += 1;
        s
    }
}

/// Leaf scripts keyed by node id, plus a log of every call made to a leaf.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScriptedLeaves {
    pub scripts: BTreeMap<String, Script>,
    pub calls: Vec<String>,
}

impl ScriptedLeaves {
    pub fn set(&mut self, id: &str, statuses: Vec<Status>) {
        self.scripts.insert(id.to_string(), Script::new(statuses));
    }

    pub fn call(&mut self, what: &str, id: &str) -> Status {
        self.calls.push(format!("{what}:{id}"));
        self.scripts
            .get_mut(id)
            .unwrap_or_else(|| panic!("no script for leaf `{id}`"))
            .next()
    }

    pub fn halt(&mut self, id: &str) {
        self.calls.push(format!("halt:{id}"));
    }

    pub fn halts(&self) -> usize {
        self.calls.iter().filter(|c| c.starts_with("halt:")).count()
    }
}

struct ScriptedAction;

impl ActionBehavior<ScriptedLeaves> for ScriptedAction {
    fn start(&mut self, leaf: &mut Leaf<'_, ScriptedLeaves>) -> Status {
        leaf.ctx.call("start", leaf.node_id.as_str())
    }

    fn poll(&mut self, leaf: &mut Leaf<'_, ScriptedLeaves>) -> Status {
        leaf.ctx.call("poll", leaf.node_id.as_str())
    }

    fn halt(&mut self, leaf: &mut Leaf<'_, ScriptedLeaves>) {
        leaf.ctx.halt(leaf.node_id.as_str());
    }
}

/// Engine registry where behavior `A` is a scripted action and `C` a
/// scripted condition.
pub fn engine_registry() -> BehaviorRegistry<ScriptedLeaves> {
    let mut reg = BehaviorRegistry::new();
    reg.register_action("A", ScriptedAction).expect("fresh registry");
    reg.register_condition("C", |leaf: &mut Leaf<'_, ScriptedLeaves>| {
        leaf.ctx.call("check", leaf.node_id.as_str())
    })
    .expect("fresh registry");
    reg
}
