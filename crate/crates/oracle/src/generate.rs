use rand::Rng;
use rockcharge_core::{DecoratorKind, NodeKind, Status, SuccessThreshold, TreeNode};

use crate::scripted::ScriptedLeaves;

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    /// Maximum depth counted in nodes; a lone leaf has depth 1.
    pub max_depth: usize,
    pub max_children: usize,
    pub max_script_len: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 5,
            max_children: 4,
            max_script_len: 6,
        }
    }
}

/// Random tree over every node kind, with scripts for its leaves.
/// Actions use behavior `A`, conditions `C`.
pub fn random_tree<R: Rng>(rng: &mut R, cfg: GenConfig) -> (TreeNode, ScriptedLeaves) {
    let mut leaves = ScriptedLeaves::default();
    let mut next_id = 0;
    let tree = node(rng, cfg, 1, &mut next_id, &mut leaves);
    (tree, leaves)
}

fn node<R: Rng>(
    rng: &mut R,
    cfg: GenConfig,
    depth: usize,
    next_id: &mut usize,
    leaves: &mut ScriptedLeaves,
) -> TreeNode {
    let id = format!("n{next_id}");
    *next_id += 1;
    let leaf_only = depth >= cfg.max_depth;
    let choice = if leaf_only { rng.random_range(0..2) } else { rng.random_range(0..11) };
    let kind = match choice {
        0 => {
            let len = rng.random_range(1..=cfg.max_script_len);
            let script = (0..len).map(|_| pick(rng, &[Status::Success, Status::Failure])).collect();
            leaves.set(&id, script);
            return TreeNode::condition(&id, "C");
        }
        1 => {
            let len = rng.random_range(1..=cfg.max_script_len);
            let script = (0..len)
                .map(|_| pick(rng, &[Status::Success, Status::Failure, Status::Running, Status::Running]))
                .collect();
            leaves.set(&id, script);
            return TreeNode::action(&id, "A");
        }
        2 => NodeKind::Sequence { memory: false },
        3 => NodeKind::Fallback { memory: false },
        4 => NodeKind::Sequence { memory: true },
        5 => NodeKind::Fallback { memory: true },
        6 => NodeKind::Parallel { success_threshold: SuccessThreshold::All },
        7 => NodeKind::Parallel { success_threshold: SuccessThreshold::Count(0) },
        8 => NodeKind::Decorator(DecoratorKind::Inverter),
        9 => NodeKind::Decorator(DecoratorKind::LoopBody),
        _ => NodeKind::Decorator(DecoratorKind::RetryUntilSuccessful {
            max_attempts: rng.random_range(1..=3),
        }),
    };
    let count = match kind {
        NodeKind::Decorator(_) => 1,
        _ => rng.random_range(1..=cfg.max_children),
    };
    let children = (0..count)
        .map(|_| node(rng, cfg, depth + 1, next_id, leaves))
        .collect();
    let kind = match kind {
        NodeKind::Parallel { success_threshold: SuccessThreshold::Count(_) } => NodeKind::Parallel {
            success_threshold: SuccessThreshold::Count(rng.random_range(1..=count)),
        },
        k => k,
    };
    TreeNode::new(id, kind, children)
}

fn pick<R: Rng, T: Copy>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}
