//! Leaf behavior registry.
//!
//! Trees reference leaves by behavior name; the registry maps names to
//! handlers. Handlers receive a [`Leaf`] giving them the node's identity,
//! its port bindings, the blackboard and the caller-supplied context `C`
//! (a simulator, a robot interface, a test script...).

use std::collections::BTreeMap;

use crate::blackboard::Blackboard;
use crate::error::BtError;
use crate::status::Status;
use crate::tree::{NodeId, Ports};

/// Everything a leaf handler may touch during one call.
pub struct Leaf<'a, C> {
    pub node_id: &'a NodeId,
    pub label: &'a str,
    pub ports: &'a Ports,
    pub blackboard: &'a mut Blackboard,
    pub ctx: &'a mut C,
}

impl<C> Leaf<'_, C> {
    /// Blackboard key bound to `port`, falling back to the port name.
    pub fn key<'k>(&'k self, port: &'k str) -> &'k str {
        self.ports.get(port).map(String::as_str).unwrap_or(port)
    }
}

/// An action may run across many ticks.
///
/// `start` is called on the first tick after the node was idle, `poll` on
/// every following tick while it keeps returning Running. `halt` is the
/// preemption signal, delivered exactly once to a Running action that is
/// aborted; the handler must leave its world consistent before returning.
pub trait ActionBehavior<C> {
    fn start(&mut self, leaf: &mut Leaf<'_, C>) -> Status;
    fn poll(&mut self, leaf: &mut Leaf<'_, C>) -> Status;
    fn halt(&mut self, _leaf: &mut Leaf<'_, C>) {}
}

/// A condition answers immediately. Returning Running is a contract
/// violation reported by the engine.
pub trait ConditionBehavior<C> {
    fn check(&mut self, leaf: &mut Leaf<'_, C>) -> Status;
}

impl<C, F> ConditionBehavior<C> for F
where
    F: for<'a> FnMut(&mut Leaf<'a, C>) -> Status,
{
    fn check(&mut self, leaf: &mut Leaf<'_, C>) -> Status {
        self(leaf)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    Action,
    Condition,
}

impl LeafKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LeafKind::Action => "Action",
            LeafKind::Condition => "Condition",
        }
    }
}

pub(crate) enum Handler<C> {
    Action(Box<dyn ActionBehavior<C>>),
    Condition(Box<dyn ConditionBehavior<C>>),
}

impl<C> Handler<C> {
    pub(crate) fn kind(&self) -> LeafKind {
        match self {
            Handler::Action(_) => LeafKind::Action,
            Handler::Condition(_) => LeafKind::Condition,
        }
    }
}

pub struct BehaviorRegistry<C> {
    handlers: BTreeMap<String, Handler<C>>,
}

impl<C> Default for BehaviorRegistry<C> {
    fn default() -> Self {
        BehaviorRegistry {
            handlers: BTreeMap::new(),
        }
    }
}

impl<C> BehaviorRegistry<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_action(
        &mut self,
        name: &str,
        action: impl ActionBehavior<C> + 'static,
    ) -> Result<(), BtError> {
        self.insert(name, Handler::Action(Box::new(action)))
    }

    pub fn register_condition(
        &mut self,
        name: &str,
        condition: impl ConditionBehavior<C> + 'static,
    ) -> Result<(), BtError> {
        self.insert(name, Handler::Condition(Box::new(condition)))
    }

    fn insert(&mut self, name: &str, handler: Handler<C>) -> Result<(), BtError> {
        if self.handlers.contains_key(name) {
            return Err(BtError::DuplicateName(name.to_string()));
        }
        self.handlers.insert(name.to_string(), handler);
        Ok(())
    }

    pub fn kind_of(&self, name: &str) -> Option<LeafKind> {
        self.handlers.get(name).map(Handler::kind)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.handlers.keys().map(String::as_str)
    }

    pub(crate) fn get_mut(&mut self, name: &str) -> Option<&mut Handler<C>> {
        self.handlers.get_mut(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Noop;
    impl ActionBehavior<()> for Noop {
        fn start(&mut self, _: &mut Leaf<'_, ()>) -> Status {
            Status::Success
        }
        fn poll(&mut self, _: &mut Leaf<'_, ()>) -> Status {
            Status::Success
        }
    }

    #[test]
    fn duplicate_registration_is_rejected() {
        let mut reg = BehaviorRegistry::<()>::new();
        reg.register_action("PumpEmulsion", Noop).unwrap();
        assert_eq!(
            reg.register_action("PumpEmulsion", Noop),
            Err(BtError::DuplicateName("PumpEmulsion".into()))
        );
        assert_eq!(
            reg.register_condition("PumpEmulsion", |_: &mut Leaf<'_, ()>| Status::Success),
            Err(BtError::DuplicateName("PumpEmulsion".into()))
        );
        assert_eq!(reg.kind_of("PumpEmulsion"), Some(LeafKind::Action));
    }
}
