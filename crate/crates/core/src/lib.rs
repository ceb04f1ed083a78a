//! Reactive behavior-tree engine.
//!
//! Trees are immutable [`TreeNode`] values; all mutable execution state lives
//! in a [`TreeRuntime`] created for one tree. Leaves are resolved by name
//! through a [`BehaviorRegistry`], so the same tree can drive a simulator or
//! scripted test doubles. The [`dsl`] module reads and writes the on-disk
//! `.tree.xml` format.

pub mod blackboard;
pub mod dsl;
mod error;
pub mod registry;
pub mod runtime;
mod status;
pub mod tree;

pub use blackboard::{Blackboard, BlackboardError, HoleRecord, Value, ValueType};
pub use error::BtError;
pub use registry::{ActionBehavior, BehaviorRegistry, ConditionBehavior, Leaf, LeafKind};
pub use runtime::{tick_root, TickTrace, TraceEntry, TreeRuntime};
pub use status::Status;
pub use tree::{DecoratorKind, NodeId, NodeKind, Ports, SuccessThreshold, TreeNode};
