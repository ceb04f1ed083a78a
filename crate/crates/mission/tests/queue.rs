use proptest::prelude::*;
use rockcharge_core::Blackboard;
use rockcharge_mission::{
    plan_mission, ChargeHole, HoleId, HoleState, MissionError, MissionFile, PlanParams, Worksite,
};

fn face(n: usize) -> Vec<ChargeHole> {
    // 5 holes per row, listed top row first so the plan has to reorder
    (0..n)
        .rev()
        .map(|i| ChargeHole::detected(format!("H{i:02}"), (i % 5) as f64 * 0.8, (i / 5) as f64 * 0.9, 3.5 + (i % 3) as f64 * 0.5))
        .collect()
}

#[test]
fn twenty_hole_drain_follows_plan_order() {
    let mut site = Worksite::new(PlanParams::default());
    site.merge_detections(face(20));
    let planned: Vec<HoleId> = site.plan().unwrap().queue.iter().cloned().collect();
    let mut bb = Blackboard::new();
    let mut drained = Vec::new();
    loop {
        match site.pop_next(&mut bb) {
            Ok(h) => drained.push(h.id),
            Err(MissionError::EmptyQueue) => break,
            Err(e) => panic!("{e}"),
        }
    }
    assert_eq!(drained, planned);
    let unique: std::collections::BTreeSet<_> = drained.iter().collect();
    assert_eq!(unique.len(), 20);
    assert_eq!(site.count(HoleState::Charging), 20);
    // hand-checkable: bottom row is H00..H04 left to right
    let first: Vec<_> = drained[..5].iter().map(HoleId::as_str).collect();
    assert_eq!(first, ["H00", "H01", "H02", "H03", "H04"]);
}

#[test]
fn emulsion_target_is_density_times_depth() {
    let mut holes = face(6);
    let params = PlanParams { linear_density: 1.25, ..Default::default() };
    let m = plan_mission(&mut holes, &params).unwrap();
    for h in &holes {
        assert_eq!(m.plan[&h.id].emulsion_target, 1.25 * h.depth);
        assert!(h.emulsion_target > 0.0);
    }
}

#[test]
fn identical_inputs_give_byte_identical_missions() {
    let render = || {
        let mut site = Worksite::new(PlanParams::default());
        site.merge_detections(face(17));
        site.plan().unwrap();
        MissionFile::from_worksite(&site).unwrap().to_json()
    };
    assert_eq!(render(), render());
}

#[test]
fn mission_file_round_trip_installs_same_queue() {
    let mut site = Worksite::new(PlanParams::default());
    site.merge_detections(face(8));
    site.plan().unwrap();
    let file = MissionFile::from_worksite(&site).unwrap();
    let parsed = MissionFile::from_json(&file.to_json()).unwrap();
    assert_eq!(parsed, file);
    let mut other = Worksite::new(PlanParams::default());
    parsed.install(&mut other, "op-2").unwrap();
    assert_eq!(other.mission.as_ref().unwrap().queue, site.mission.as_ref().unwrap().queue);
    assert!(other.plan_is_current());
}

proptest! {
    #[test]
    fn peek_then_pop_agree(n in 1usize..40, pops in 0usize..45) {
        let mut site = Worksite::new(PlanParams::default());
        site.merge_detections(face(n));
        site.plan().unwrap();
        let mut bb = Blackboard::new();
        for _ in 0..pops {
            let peeked = site.peek_next().map(|h| h.id.clone());
            let before = site.queue_len();
            // peeking again changes nothing
            prop_assert_eq!(site.peek_next().map(|h| h.id.clone()), peeked.clone());
            prop_assert_eq!(site.queue_len(), before);
            match site.pop_next(&mut bb) {
                Ok(h) => {
                    prop_assert_eq!(Some(h.id), peeked);
                    prop_assert_eq!(site.queue_len(), before - 1);
                }
                Err(e) => {
                    prop_assert_eq!(e, MissionError::EmptyQueue);
                    prop_assert!(peeked.is_none());
                }
            }
        }
    }

    #[test]
    fn plan_order_is_sorted_by_row_then_column(pts in proptest::collection::vec((0u8..10, 0u8..6), 1..60)) {
        let mut holes: Vec<ChargeHole> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| ChargeHole::detected(format!("H{i}"), x as f64 * 0.5, y as f64 * 0.5, 2.0))
            .collect();
        let m = plan_mission(&mut holes, &PlanParams::default()).unwrap();
        let by_id: std::collections::BTreeMap<_, _> = holes.iter().map(|h| (h.id.clone(), h)).collect();
        let keys: Vec<_> = m.queue.iter().map(|id| {
            let h = by_id[id];
            (pts[h.id.as_str()[1..].parse::<usize>().unwrap()].1, pts[h.id.as_str()[1..].parse::<usize>().unwrap()].0, h.id.clone())
        }).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        prop_assert_eq!(keys, sorted);
    }
}
