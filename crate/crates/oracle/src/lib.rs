//! Test support: an independent step interpreter for behavior trees,
//! scripted leaves and a random tree generator.
//!
//! The interpreter only reads the [`TreeNode`] data type; it keeps its own
//! per-node state in a map and never touches the engine's runtime.

mod generate;
mod reference;
mod scripted;

pub use generate::{random_tree, GenConfig};
pub use reference::{ReferenceInterpreter, RefTick};
pub use scripted::{engine_registry, Script, ScriptedLeaves};

use rockcharge_core::{Blackboard, TreeNode, TreeRuntime};

/// First divergence between engine and reference.
#[derive(Debug)]
pub struct Mismatch {
    pub tick: usize,
    pub detail: String,
}

/// Tick both implementations `ticks` times on copies of the same scripts
/// and compare root status, visit trace and preemption order every tick.
pub fn compare(tree: &TreeNode, scripts: &ScriptedLeaves, ticks: usize) -> Result<(), Mismatch> {
    let mut engine_leaves = scripts.clone();
    let mut ref_leaves = scripts.clone();
    let mut runtime = TreeRuntime::new(tree).map_err(|e| Mismatch { tick: 0, detail: e.to_string() })?;
    let mut registry = engine_registry();
    let mut bb = Blackboard::new();
    let mut reference = ReferenceInterpreter::new(tree);
    for t in 0..ticks {
        let (status, trace) = runtime
            .tick(tree, &mut bb, &mut registry, &mut engine_leaves)
            .map_err(|e| Mismatch { tick: t, detail: e.to_string() })?;
        let expected = reference.tick(&mut ref_leaves);
        let visited: Vec<(String, _)> = trace
            .entries
            .iter()
            .map(|e| (e.node_id.to_string(), e.status))
            .collect();
        let preempted: Vec<String> = trace.preempted.iter().map(|n| n.to_string()).collect();
        if status != expected.status {
            return Err(Mismatch {
                tick: t,
                detail: format!("root status {status:?} != reference {:?}", expected.status),
            });
        }
        if visited != expected.visited {
            return Err(Mismatch {
                tick: t,
                detail: format!("trace {visited:?} != reference {:?}", expected.visited),
            });
        }
        if preempted != expected.preempted {
            return Err(Mismatch {
                tick: t,
                detail: format!("preempted {preempted:?} != reference {:?}", expected.preempted),
            });
        }
        if engine_leaves.calls != ref_leaves.calls {
            return Err(Mismatch {
                tick: t,
                detail: "leaf call logs diverged".into(),
            });
        }
    }
    Ok(())
}
