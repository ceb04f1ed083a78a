//! The phase trees. Each is also shipped as a `.tree.xml` asset; the
//! builder here and the assets must stay structurally identical.

use std::path::Path;

use rockcharge_core::dsl::{self, BehaviorSpec, DslError, SpecKind, TreeDocument};
use rockcharge_core::{DecoratorKind, SuccessThreshold, TreeNode, ValueType};

pub const PRESCAN: &str = "PreScan";
pub const DETECT_HOLES: &str = "DetectHoles";
pub const CHARGE_PLAN: &str = "ChargePlan";
pub const CHARGING: &str = "Charging";

pub const GIVE_READY_KEY: &str = "handover_give_ready";
pub const TAKE_READY_KEY: &str = "handover_take_ready";

/// Asset file name and contents for every shipped tree.
pub const ASSETS: [(&str, &str); 4] = [
    ("prescan.tree.xml", include_str!("../assets/prescan.tree.xml")),
    ("detect_holes.tree.xml", include_str!("../assets/detect_holes.tree.xml")),
    ("charge_plan.tree.xml", include_str!("../assets/charge_plan.tree.xml")),
    ("charging.tree.xml", include_str!("../assets/charging.tree.xml")),
];

const ACTIONS: &[(&str, &[(&str, ValueType)])] = &[
    ("ScanFace", &[]),
    ("DetectHoles", &[]),
    ("GeneratePlan", &[]),
    ("PeekNextHole", &[("hole", ValueType::Hole)]),
    ("AssembleDetonator", &[("hole", ValueType::Hole)]),
    ("InsertDetonatorInHoseTip", &[]),
    ("HandoverGive", &[("give", ValueType::Flag), ("take", ValueType::Flag)]),
    ("HandoverTake", &[("give", ValueType::Flag), ("take", ValueType::Flag), ("hole", ValueType::Hole)]),
    ("PopHole", &[("hole", ValueType::Hole)]),
    ("MoveBoomToRegion", &[("hole", ValueType::Hole)]),
    ("PositionAtHole", &[("hole", ValueType::Hole)]),
    ("SweepSearch", &[("hole", ValueType::Hole)]),
    ("FeedHose", &[("hole", ValueType::Hole)]),
    ("WiggleHose", &[("hole", ValueType::Hole)]),
    ("PumpEmulsionWhileRetracting", &[("hole", ValueType::Hole)]),
    ("MarkHoleCharged", &[("hole", ValueType::Hole)]),
];

const CONDITIONS: &[(&str, &[(&str, ValueType)])] = &[
    ("PlanUpToDate", &[]),
    ("IsRobotHoldingDetonator", &[]),
    ("PreparationQueueEmpty", &[("hole", ValueType::Hole)]),
    ("MissionQueueEmpty", &[("hole", ValueType::Hole)]),
    ("AtHole", &[("hole", ValueType::Hole)]),
    ("HoleCharged", &[("hole", ValueType::Hole)]),
];

fn act(id: &str, behavior: &str, label: &str) -> TreeNode {
    with_ports(TreeNode::action(id, behavior).with_label(label), behavior)
}

fn cond(id: &str, behavior: &str, label: &str) -> TreeNode {
    with_ports(TreeNode::condition(id, behavior).with_label(label), behavior)
}

/// Bind each manifest port to its conventional key.
fn with_ports(mut node: TreeNode, behavior: &str) -> TreeNode {
    let spec = ACTIONS.iter().chain(CONDITIONS).find(|(n, _)| *n == behavior);
    let ports = spec.map(|(_, p)| *p).unwrap_or(&[]);
    for (port, _) in ports {
        let key = match (*port, behavior) {
            ("hole", "PeekNextHole" | "AssembleDetonator") => crate::NEXT_HOLE_KEY,
            ("hole", _) => crate::CURRENT_HOLE_KEY,
            ("give", _) => GIVE_READY_KEY,
            ("take", _) => TAKE_READY_KEY,
            _ => unreachable!("port without a conventional key"),
        };
        node = node.with_port(port, key);
    }
    node
}

pub fn prescan_tree() -> TreeNode {
    act("scan_face", "ScanFace", "Scan working area")
}

pub fn detect_holes_tree() -> TreeNode {
    act("detect", "DetectHoles", "Detect holes")
}

pub fn charge_plan_tree() -> TreeNode {
    TreeNode::fallback(
        "plan",
        vec![
            cond("plan_current", "PlanUpToDate", "Plan up to date?"),
            act("generate_plan", "GeneratePlan", "Generate charging plan"),
        ],
    )
    .with_label("Charging plan!")
}

/// Child A: the explosives manipulator primes detonators one hole ahead.
fn explosives_branch() -> TreeNode {
    let prepare = TreeNode::sequence(
        "prepare",
        vec![
            TreeNode::fallback(
                "detonator_ready",
                vec![
                    cond("holding_detonator", "IsRobotHoldingDetonator", "Is Robot Holding Detonator?"),
                    TreeNode::sequence(
                        "fetch_detonator",
                        vec![
                            act("peek", "PeekNextHole", "Peek next hole"),
                            act("assemble", "AssembleDetonator", "Assemble detonator and primer"),
                            act("insert", "InsertDetonatorInHoseTip", "Insert detonator in hose tip"),
                        ],
                    )
                    .with_label("Fetch detonator"),
                ],
            )
            .with_label("Detonator ready!"),
            act("give", "HandoverGive", "Hand over detonator"),
        ],
    )
    .with_label("Prepare next hole");
    TreeNode::fallback(
        "explosives",
        vec![
            cond("preparation_done", "PreparationQueueEmpty", "Preparation queue empty?"),
            TreeNode::decorator("prepare_loop", DecoratorKind::LoopBody, prepare).with_label("Next detonator"),
        ],
    )
    .with_label("Explosives manipulator")
}

/// Child B: the charging manipulator and boom charge holes from the queue.
fn charging_branch() -> TreeNode {
    let positioned = TreeNode::fallback(
        "positioned",
        vec![
            cond("at_hole", "AtHole", "At hole?"),
            TreeNode::sequence(
                "approach",
                vec![
                    act("move_boom", "MoveBoomToRegion", "Move boom to region"),
                    TreeNode::fallback(
                        "locate",
                        vec![
                            act("position", "PositionAtHole", "Position at hole"),
                            TreeNode::sequence(
                                "search",
                                vec![
                                    act("sweep", "SweepSearch", "Sweep search"),
                                    act("position_after_sweep", "PositionAtHole", "Position at hole"),
                                ],
                            )
                            .with_label("Search for hole"),
                        ],
                    )
                    .with_label("Locate hole"),
                ],
            )
            .with_label("Approach hole"),
        ],
    )
    .with_label("Positioned at hole!");
    let feed = TreeNode::fallback(
        "feed",
        vec![
            act("feed_hose", "FeedHose", "Feed hose"),
            TreeNode::decorator(
                "unblock",
                DecoratorKind::RetryUntilSuccessful { max_attempts: 3 },
                TreeNode::sequence(
                    "wiggle_and_feed",
                    vec![
                        act("wiggle", "WiggleHose", "Wiggle hose"),
                        act("feed_after_wiggle", "FeedHose", "Feed hose"),
                    ],
                )
                .with_label("Wiggle and feed"),
            )
            .with_label("Clear blockage"),
        ],
    )
    .with_label("Hose at bottom!");
    let charge = TreeNode::fallback(
        "charge_hole",
        vec![
            cond("hole_charged", "HoleCharged", "Hole charged?"),
            TreeNode::sequence(
                "charge",
                vec![
                    feed,
                    act("pump", "PumpEmulsionWhileRetracting", "Pump emulsion while retracting"),
                    act("mark_charged", "MarkHoleCharged", "Mark hole charged"),
                ],
            )
            .with_label("Charge"),
        ],
    )
    .with_label("Charge hole!");
    let cycle = TreeNode::sequence(
        "charge_cycle",
        vec![
            act("pop", "PopHole", "Pop hole"),
            positioned,
            act("take", "HandoverTake", "Take detonator"),
            charge,
        ],
    )
    .with_label("Charge next hole");
    TreeNode::fallback(
        "charger",
        vec![
            cond("mission_done", "MissionQueueEmpty", "Mission queue empty?"),
            TreeNode::decorator("charge_loop", DecoratorKind::LoopBody, cycle).with_label("Next hole"),
        ],
    )
    .with_label("Charging manipulator and boom")
}

pub fn charging_tree() -> TreeNode {
    TreeNode::parallel("charging", SuccessThreshold::All, vec![explosives_branch(), charging_branch()])
        .with_label("Charging")
}

fn manifest(doc: &mut TreeDocument, used: impl Fn(&str) -> bool) {
    for (list, kind) in [(ACTIONS, SpecKind::Action), (CONDITIONS, SpecKind::Condition)] {
        for (name, ports) in list.iter().filter(|(n, _)| used(n)) {
            doc.behaviors.insert(
                name.to_string(),
                BehaviorSpec { kind, ports: ports.iter().map(|(p, t)| (p.to_string(), *t)).collect() },
            );
        }
    }
}

fn single(name: &str, tree: TreeNode) -> TreeDocument {
    let mut doc = TreeDocument::default();
    let used: Vec<String> = tree
        .iter()
        .filter_map(|n| match &n.kind {
            rockcharge_core::NodeKind::Action { behavior, ports } | rockcharge_core::NodeKind::Condition { behavior, ports } => {
                for key in ports.values() {
                    let ty = if key == GIVE_READY_KEY || key == TAKE_READY_KEY { ValueType::Flag } else { ValueType::Hole };
                    doc.blackboard.insert(key.clone(), ty);
                }
                Some(behavior.clone())
            }
            _ => None,
        })
        .collect();
    manifest(&mut doc, |n| used.iter().any(|u| u == n));
    doc.trees.insert(name.to_string(), tree);
    doc
}

/// One document per phase tree, keyed by asset file name.
pub fn asset_documents() -> Vec<(&'static str, TreeDocument)> {
    vec![
        (ASSETS[0].0, single(PRESCAN, prescan_tree())),
        (ASSETS[1].0, single(DETECT_HOLES, detect_holes_tree())),
        (ASSETS[2].0, single(CHARGE_PLAN, charge_plan_tree())),
        (ASSETS[3].0, single(CHARGING, charging_tree())),
    ]
}

/// All four phase trees with their merged manifest.
pub fn build_mission_trees() -> TreeDocument {
    let mut doc = TreeDocument::default();
    for (_, d) in asset_documents() {
        doc.merge(d).expect("builder documents are consistent");
    }
    doc
}

/// Parse and merge the assets compiled into this crate.
pub fn shipped_trees() -> Result<TreeDocument, DslError> {
    let mut doc = TreeDocument::default();
    for (_, text) in ASSETS {
        doc.merge(dsl::parse(text)?)?;
    }
    Ok(doc)
}

#[derive(Debug, thiserror::Error)]
pub enum TreeLoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Dsl { path: String, source: DslError },
    #[error("no .tree.xml files in {0}")]
    Empty(String),
}

/// Parse and merge every `.tree.xml` file in `dir`, in file-name order.
pub fn load_tree_dir(dir: &Path) -> Result<TreeDocument, TreeLoadError> {
    let io = |source| TreeLoadError::Io { path: dir.display().to_string(), source };
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.to_string_lossy().ends_with(dsl::FILE_EXTENSION))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(TreeLoadError::Empty(dir.display().to_string()));
    }
    let mut doc = TreeDocument::default();
    for path in files {
        let p = path.display().to_string();
        let text = std::fs::read_to_string(&path).map_err(|source| TreeLoadError::Io { path: p.clone(), source })?;
        let parsed = dsl::parse(&text).map_err(|source| TreeLoadError::Dsl { path: p.clone(), source })?;
        doc.merge(parsed).map_err(|source| TreeLoadError::Dsl { path: p, source })?;
    }
    Ok(doc)
}
