//! Engine versus the independent reference interpreter.

use std::time::Instant;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rockcharge_core::{Blackboard, NodeKind, TreeRuntime};
use rockcharge_oracle::{compare, engine_registry, random_tree, GenConfig};

#[test]
fn thousand_random_trees_match_reference() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut kinds = std::collections::BTreeSet::new();
    for i in 0..1000 {
        let (tree, scripts) = random_tree(&mut rng, GenConfig::default());
        for n in tree.iter() {
            kinds.insert(format!("{}{}", n.kind.name(), if n.kind.is_memory() { "*" } else { "" }));
        }
        if let Err(m) = compare(&tree, &scripts, 50) {
            panic!("tree {i} diverged at tick {}: {}\n{tree:#?}", m.tick, m.detail);
        }
    }
    // every node kind, memory variants included, was exercised
    assert!(kinds.len() >= 8, "{kinds:?}");
    assert!(started.elapsed().as_secs() < 30);
}

fn arb_seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_is_preorder_and_halted_subtrees_are_idle(seed in arb_seed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, mut leaves) = random_tree(&mut rng, GenConfig::default());
        let order: Vec<_> = tree.iter().map(|n| n.id.clone()).collect();
        let mut runtime = TreeRuntime::new(&tree).unwrap();
        let mut registry = engine_registry();
        let mut bb = Blackboard::new();
        for _ in 0..20 {
            let (_, trace) = runtime.tick(&tree, &mut bb, &mut registry, &mut leaves).unwrap();
            // visit order is a subsequence of pre-order, each node at most once
            let mut pos = 0;
            for e in &trace.entries {
                let at = order[pos..].iter().position(|id| *id == e.node_id);
                prop_assert!(at.is_some(), "{} out of pre-order", e.node_id);
                pos += at.unwrap() + 1;
            }
            // conditions never report Running
            for e in &trace.entries {
                if let Some(NodeKind::Condition { .. }) = tree.find(&e.node_id).map(|n| &n.kind) {
                    prop_assert!(!e.status.is_running());
                }
            }
        }
        let before = leaves.halts();
        runtime.halt(&tree, &tree.id, &mut bb, &mut registry, &mut leaves).unwrap();
        prop_assert!(runtime.is_idle());
        let after_first = leaves.halts();
        let preempted = runtime.halt(&tree, &tree.id, &mut bb, &mut registry, &mut leaves).unwrap();
        prop_assert!(preempted.is_empty());
        prop_assert_eq!(leaves.halts(), after_first);
        prop_assert!(after_first >= before);
    }

    #[test]
    fn reset_then_replay_reproduces_traces(seed in arb_seed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tree, scripts) = random_tree(&mut rng, GenConfig::default());
        let mut registry = engine_registry();
        let mut bb = Blackboard::new();
        let mut runtime = TreeRuntime::new(&tree).unwrap();
        let run = |runtime: &mut TreeRuntime, registry: &mut _, bb: &mut Blackboard| {
            let mut leaves = scripts.clone();
            (0..15)
                .map(|_| {
                    let (s, t) = runtime.tick(&tree, bb, registry, &mut leaves).unwrap();
                    (s, t.entries, t.preempted)
                })
                .collect::<Vec<_>>()
        };
        let first = run(&mut runtime, &mut registry, &mut bb);
        runtime.reset();
        let second = run(&mut runtime, &mut registry, &mut bb);
        prop_assert_eq!(first, second);
        prop_assert_eq!(runtime.tick_count(), 30);
    }
}
