#![allow(dead_code)]

use rockcharge_core::{tick_root, BehaviorRegistry, Blackboard, Status, TickTrace, TreeNode, TreeRuntime};
use rockcharge_mission::trees::build_mission_trees;
use rockcharge_mission::{PlanParams, Worksite};
use rockcharge_sim::{registry, Rig, Scenario};

pub struct Driver {
    pub rig: Rig,
    pub bb: Blackboard,
    pub reg: BehaviorRegistry<Rig>,
    pub traces: Vec<TickTrace>,
}

impl Driver {
    pub fn new(scenario: &Scenario) -> Driver {
        let doc = build_mission_trees();
        Driver {
            rig: Rig::new(scenario, Worksite::new(PlanParams::default())),
            bb: Blackboard::with_schema(doc.blackboard.clone()),
            reg: registry(),
            traces: Vec::new(),
        }
    }

    /// Tick `tree` from a fresh runtime until it stops running.
    pub fn run(&mut self, tree: &TreeNode, max_ticks: usize) -> Status {
        let mut rt = TreeRuntime::new(tree).unwrap();
        self.rig.restart(&mut self.bb);
        for _ in 0..max_ticks {
            let (s, trace) = tick_root(tree, &mut rt, &mut self.bb, &mut self.reg, &mut self.rig).unwrap();
            self.traces.push(trace);
            if s != Status::Running {
                return s;
            }
            self.rig.world.step(1);
        }
        Status::Running
    }

    pub fn phase(&mut self, name: &str, max_ticks: usize) -> Status {
        let tree = build_mission_trees().trees[name].clone();
        self.run(&tree, max_ticks)
    }

    /// Scan, detect and plan.
    pub fn prepare(&mut self) {
        for name in ["PreScan", "DetectHoles", "ChargePlan"] {
            assert_eq!(self.phase(name, 1000), Status::Success, "{name}");
        }
    }

    pub fn visits(&self, node: &str) -> usize {
        self.traces.iter().filter(|t| t.visited(node)).count()
    }

    pub fn statuses(&self, node: &str) -> Vec<Status> {
        self.traces.iter().filter_map(|t| t.status_of(node)).collect()
    }
}

pub fn scenario(rows: usize, cols: usize) -> Scenario {
    Scenario::grid(rows, cols, 42)
}
