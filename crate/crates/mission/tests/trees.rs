use rockcharge_core::dsl::{self, DiagnosticCode, Severity};
use rockcharge_core::{DecoratorKind, NodeKind, SuccessThreshold, TreeNode};
use rockcharge_mission::trees::{build_mission_trees, shipped_trees, ASSETS, CHARGING};

fn find<'a>(t: &'a TreeNode, id: &str) -> &'a TreeNode {
    t.iter().find(|n| n.id.as_str() == id).unwrap_or_else(|| panic!("no node {id}"))
}

fn behavior(n: &TreeNode) -> Option<&str> {
    match &n.kind {
        NodeKind::Action { behavior, .. } | NodeKind::Condition { behavior, .. } => Some(behavior),
        _ => None,
    }
}

#[test]
fn charging_root_is_parallel_success_on_all_with_two_children() {
    let doc = shipped_trees().unwrap();
    let root = doc.tree(CHARGING).unwrap();
    assert_eq!(root.kind, NodeKind::Parallel { success_threshold: SuccessThreshold::All });
    assert_eq!(root.children.len(), 2);
}

#[test]
fn explosives_branch_is_guarded_by_holding_detonator() {
    let doc = build_mission_trees();
    let a = &doc.tree(CHARGING).unwrap().children[0];
    let guard = find(a, "detonator_ready");
    assert!(matches!(guard.kind, NodeKind::Fallback { memory: false }));
    assert_eq!(behavior(&guard.children[0]), Some("IsRobotHoldingDetonator"));
    let fetch: Vec<_> = guard.children[1].children.iter().filter_map(behavior).collect();
    assert_eq!(fetch, ["PeekNextHole", "AssembleDetonator", "InsertDetonatorInHoseTip"]);
}

#[test]
fn charging_branch_structure() {
    let doc = build_mission_trees();
    let b = &doc.tree(CHARGING).unwrap().children[1];
    assert_eq!(behavior(&b.children[0]), Some("MissionQueueEmpty"));
    assert!(matches!(b.children[1].kind, NodeKind::Decorator(DecoratorKind::LoopBody)));
    let cycle = &b.children[1].children[0];
    let steps: Vec<_> = cycle.children.iter().map(|c| behavior(c).unwrap_or(c.id.as_str())).collect();
    assert_eq!(steps, ["PopHole", "positioned", "HandoverTake", "charge_hole"]);
    let locate = find(b, "locate");
    assert_eq!(behavior(&locate.children[0]), Some("PositionAtHole"));
    let search: Vec<_> = locate.children[1].children.iter().filter_map(behavior).collect();
    assert_eq!(search, ["SweepSearch", "PositionAtHole"]);
    assert_eq!(
        find(b, "unblock").kind,
        NodeKind::Decorator(DecoratorKind::RetryUntilSuccessful { max_attempts: 3 })
    );
}

#[test]
fn backward_chaining_goal_conditions_come_first() {
    let doc = build_mission_trees();
    let root = doc.tree(CHARGING).unwrap();
    for id in ["explosives", "detonator_ready", "charger", "positioned", "charge_hole"] {
        assert!(matches!(find(root, id).children[0].kind, NodeKind::Condition { .. }), "{id}");
    }
}

#[test]
fn shipped_trees_have_no_errors_and_no_memory_nodes() {
    let doc = shipped_trees().unwrap();
    let diags = dsl::validate(&doc);
    assert!(diags.iter().all(|d| d.severity == Severity::Warning), "{diags:#?}");
    // the only hints are the two recovery fallbacks whose first try is an action
    let hinted: Vec<_> = diags.iter().map(|d| (d.code, d.node_id.as_str())).collect();
    assert_eq!(
        hinted,
        [
            (DiagnosticCode::UnguardedFallbackAction, "position"),
            (DiagnosticCode::UnguardedFallbackAction, "feed_hose"),
        ]
    );
    for tree in doc.trees.values() {
        assert!(tree.iter().all(|n| !n.kind.is_memory()));
    }
}

#[test]
fn memory_sequence_under_charging_parallel_is_flagged() {
    let mut doc = shipped_trees().unwrap();
    let root = doc.trees.get_mut(CHARGING).unwrap();
    let cycle = &mut root.children[1].children[1].children[0];
    cycle.kind = NodeKind::Sequence { memory: true };
    let diags = dsl::validate(&doc);
    let hit: Vec<_> = diags.iter().filter(|d| d.code == DiagnosticCode::MemoryUnderParallel).collect();
    assert_eq!(hit.len(), 1);
    assert_eq!(hit[0].node_id.as_str(), "charge_cycle");
    assert_eq!(hit[0].severity, Severity::Warning);
    assert_eq!(dsl::exit_code(&diags), 1);
}

#[test]
fn corpus_round_trips_with_child_order() {
    for (file, text) in ASSETS {
        let doc = dsl::parse(text).unwrap();
        let again = dsl::parse(&dsl::serialize(&doc)).unwrap();
        assert_eq!(again, doc, "{file}");
        for (name, tree) in &doc.trees {
            let a: Vec<_> = tree.iter().map(|n| n.id.clone()).collect();
            let b: Vec<_> = again.trees[name].iter().map(|n| n.id.clone()).collect();
            assert_eq!(a, b, "{file}");
        }
    }
}
