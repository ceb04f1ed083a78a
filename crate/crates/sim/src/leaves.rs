//! Every leaf behavior used by the mission trees, implemented against the
//! simulated rig. Actions check their goal first and succeed at once when it
//! already holds, so a reactive re-tick or a restart never redoes work.

use rockcharge_core::{ActionBehavior, BehaviorRegistry, BtError, Leaf, Status, Value};
use rockcharge_mission::{ChargeHole, HoleId, HoleState, CURRENT_HOLE_KEY};

use crate::config::FaultKind;
use crate::rig::Rig;
use crate::rng::Channel;
use crate::world::{Actor, Task};

use Status::{Failure, Running, Success};

type L<'a, 'b> = &'a mut Leaf<'b, Rig>;

fn fail(l: L, why: impl Into<String>) -> Status {
    l.ctx.world.last_failure = Some(format!("{}: {}", l.label, why.into()));
    Failure
}

/// The hole bound to this leaf's `hole` port.
fn hole(l: L) -> Option<ChargeHole> {
    let key = l.key("hole").to_string();
    let id = match l.blackboard.get(&key) {
        Ok(Value::Hole(h)) => HoleId::new(h.id.clone()),
        _ => return None,
    };
    l.ctx.site.hole(&id).cloned()
}

fn flag(l: L, port: &str) -> bool {
    let key = l.key(port).to_string();
    l.blackboard.get_flag(&key).unwrap_or(false)
}

fn set_flag(l: L, port: &str, v: bool) {
    let key = l.key(port).to_string();
    let _ = l.blackboard.set(&key, Value::Flag(v));
}

fn current_is_charging(rig: &Rig, bb: &rockcharge_core::Blackboard) -> Option<String> {
    rig.site
        .current_hole(bb)
        .filter(|h| h.state == HoleState::Charging)
        .map(|h| h.id.to_string())
}

/// Action whose start and poll are the same goal-checking step; halting
/// cancels whatever activities the node drives.
struct Step<F>(F);

impl<F> ActionBehavior<Rig> for Step<F>
where
    F: for<'a, 'b> FnMut(&'a mut Leaf<'b, Rig>) -> Status,
{
    fn start(&mut self, leaf: &mut Leaf<'_, Rig>) -> Status {
        (self.0)(leaf)
    }

    fn poll(&mut self, leaf: &mut Leaf<'_, Rig>) -> Status {
        (self.0)(leaf)
    }

    fn halt(&mut self, leaf: &mut Leaf<'_, Rig>) {
        leaf.ctx.world.cancel_owned(leaf.node_id.as_str());
    }
}

/// Handover side: halting either side aborts the joint transfer.
struct Handover<F>(F);

impl<F> ActionBehavior<Rig> for Handover<F>
where
    F: for<'a, 'b> FnMut(&'a mut Leaf<'b, Rig>) -> Status,
{
    fn start(&mut self, leaf: &mut Leaf<'_, Rig>) -> Status {
        (self.0)(leaf)
    }

    fn poll(&mut self, leaf: &mut Leaf<'_, Rig>) -> Status {
        (self.0)(leaf)
    }

    fn halt(&mut self, leaf: &mut Leaf<'_, Rig>) {
        leaf.ctx.world.abort(Actor::Handover);
        set_flag(leaf, "give", false);
        set_flag(leaf, "take", false);
    }
}

fn scan_face(l: L) -> Status {
    if l.ctx.world.scanned {
        return Success;
    }
    let ticks = l.ctx.world.config.scan_ticks;
    if l.ctx.world.run(Actor::Scanner, l.node_id.as_str(), Task::Scan, ticks) {
        l.ctx.world.scanned = true;
        return Success;
    }
    Running
}

fn detect_holes(l: L) -> Status {
    let ticks = l.ctx.world.config.detect_ticks;
    if !l.ctx.world.run(Actor::Scanner, l.node_id.as_str(), Task::Detect, ticks) {
        return Running;
    }
    let seen = l.ctx.world.detect();
    if seen.is_empty() {
        return fail(l, "no holes detected");
    }
    l.ctx
        .site
        .merge_detections(seen.into_iter().map(|(id, x, y, depth)| ChargeHole::detected(id, x, y, depth)));
    Success
}

fn generate_plan(l: L) -> Status {
    match l.ctx.site.plan() {
        Ok(_) => Success,
        Err(e) => fail(l, e.to_string()),
    }
}

fn peek_next_hole(l: L) -> Status {
    let key = l.key("hole").to_string();
    let w = &l.ctx.world;
    if w.secondary.prepared_for.is_some() && l.blackboard.contains(&key) {
        return Success;
    }
    // the current hole still needs its detonator after a restart
    let current = current_is_charging(l.ctx, l.blackboard).filter(|id| !w.primed.contains(id) && !w.hose.tip_loaded);
    let target = match current {
        Some(id) => l.ctx.site.hole(&HoleId::new(id)).cloned(),
        None => l.ctx.site.peek_next().cloned(),
    };
    let Some(h) = target else {
        return fail(l, "no hole left to prepare");
    };
    l.ctx.world.secondary.prepared_for = Some(h.id.to_string());
    let _ = l.blackboard.set(&key, Value::Hole(h.record()));
    Success
}

fn assemble_detonator(l: L) -> Status {
    let w = &mut l.ctx.world;
    if w.secondary.assembled || w.secondary.holding_detonator {
        return Success;
    }
    if w.inventory == 0 {
        return fail(l, "detonator inventory empty");
    }
    let ticks = w.config.assemble_ticks;
    if w.run(Actor::Secondary, l.node_id.as_str(), Task::Assemble, ticks) {
        w.inventory -= 1;
        w.detonators_used += 1;
        w.secondary.assembled = true;
        return Success;
    }
    Running
}

fn insert_detonator(l: L) -> Status {
    let w = &mut l.ctx.world;
    if w.secondary.holding_detonator {
        return Success;
    }
    if !w.secondary.assembled {
        return fail(l, "no assembled detonator");
    }
    let ticks = w.config.insert_ticks;
    if !w.run(Actor::Secondary, l.node_id.as_str(), Task::Insert, ticks) {
        return Running;
    }
    w.secondary.assembled = false;
    let key = w.secondary.prepared_for.clone().unwrap_or_default();
    let p = w.faults.p_detonator_drop;
    let dropped = w.scripted(&key, |k| matches!(k, FaultKind::DetonatorDrop)).is_some()
        || w.rng.bernoulli(Channel::DetonatorDrop, &key, p);
    if dropped {
        w.detonators_dropped += 1;
        return fail(l, "detonator dropped");
    }
    w.secondary.holding_detonator = true;
    Success
}

/// Both sides raised their flag: run the joint transfer.
fn transfer(l: L) -> Status {
    if !(flag(l, "give") && flag(l, "take")) {
        return Running;
    }
    let ticks = l.ctx.world.config.handover_ticks;
    if !l.ctx.world.run(Actor::Handover, l.node_id.as_str(), Task::Handover, ticks) {
        return Running;
    }
    let w = &mut l.ctx.world;
    w.secondary.holding_detonator = false;
    w.secondary.prepared_for = None;
    w.hose.tip_loaded = true;
    set_flag(l, "give", false);
    set_flag(l, "take", false);
    Success
}

fn handover_give(l: L) -> Status {
    let w = &l.ctx.world;
    if !w.secondary.holding_detonator {
        if w.hose.tip_loaded {
            return Success;
        }
        return fail(l, "nothing to hand over");
    }
    set_flag(l, "give", true);
    transfer(l)
}

fn handover_take(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    let w = &l.ctx.world;
    if w.hose.tip_loaded || w.primed.contains(h.id.as_str()) {
        return Success;
    }
    set_flag(l, "take", true);
    transfer(l)
}

fn pop_hole(l: L) -> Status {
    if current_is_charging(l.ctx, l.blackboard).is_some() {
        return Success;
    }
    match l.ctx.site.pop_next(l.blackboard) {
        Ok(h) => {
            let key = l.key("hole").to_string();
            if key != CURRENT_HOLE_KEY {
                let _ = l.blackboard.set(&key, Value::Hole(h.record()));
            }
            Success
        }
        Err(e) => fail(l, e.to_string()),
    }
}

fn move_boom(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    let region = l.ctx.world.region_of(h.x, h.y);
    let w = &mut l.ctx.world;
    if w.boom_region == Some(region) {
        return Success;
    }
    let ticks = w.config.boom_ticks;
    if w.run(Actor::Boom, l.node_id.as_str(), Task::MoveBoom { region }, ticks) {
        w.boom_region = Some(region);
        w.tool_at = None;
        return Success;
    }
    Running
}

fn position_at_hole(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    let id = h.id.to_string();
    if l.ctx.world.tool_at.as_deref() == Some(id.as_str()) {
        return Success;
    }
    if l.ctx.world.lost.contains(&id) {
        return fail(l, format!("hole {id} not found"));
    }
    if l.ctx.world.boom_region != Some(l.ctx.world.region_of(h.x, h.y)) {
        return fail(l, "boom is not over the hole's region");
    }
    let ticks = l.ctx.world.config.position_ticks;
    if !l.ctx.world.run(Actor::Primary, l.node_id.as_str(), Task::Position { hole: id.clone() }, ticks) {
        return Running;
    }
    let error = l.ctx.estimate_error(&h).unwrap_or(f64::INFINITY);
    let w = &mut l.ctx.world;
    let p = w.faults.p_hole_not_found_at_approach;
    let scripted = w.scripted(&id, |k| matches!(k, FaultKind::HoleNotFound)).is_some();
    let unlucky = !w.located.contains(&id) && w.rng.bernoulli(Channel::HoleNotFound, &id, p);
    let off = error > w.config.position_tolerance;
    if scripted || unlucky || off {
        w.lost.insert(id.clone());
        let why = if off {
            format!("hole {id} not found: estimate off by {:.0} mm", error * 1000.0)
        } else {
            format!("hole {id} not found")
        };
        return fail(l, why);
    }
    w.tool_at = Some(id);
    Success
}

fn sweep_search(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    let id = h.id.to_string();
    let w = &mut l.ctx.world;
    if w.located.contains(&id) && !w.lost.contains(&id) {
        return Success;
    }
    let ticks = w.config.sweep_ticks;
    if !w.run(Actor::Primary, l.node_id.as_str(), Task::Sweep { hole: id.clone() }, ticks) {
        return Running;
    }
    let p = w.faults.p_sweep_recovery_success;
    let found = match w.scripted(&id, |k| matches!(k, FaultKind::SweepOutcome { .. })) {
        Some(FaultKind::SweepOutcome { success }) => success,
        _ => w.rng.bernoulli(Channel::Sweep, &id, p),
    };
    if !found {
        return fail(l, format!("sweep did not find hole {id}"));
    }
    w.located.insert(id.clone());
    w.lost.remove(&id);
    let t = w.truth[&id].clone();
    if let Ok(est) = l.ctx.site.hole_mut(&h.id) {
        est.x = t.x;
        est.y = t.y;
    }
    Success
}

fn feed_hose(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    let id = h.id.to_string();
    let w = &mut l.ctx.world;
    if w.fed_to_bottom.contains(&id) {
        return Success;
    }
    if w.tool_at.as_deref() != Some(id.as_str()) {
        return fail(l, "tool is not at the hole");
    }
    if !w.hose.tip_loaded {
        return fail(l, "no detonator in the hose tip");
    }
    w.decide_blockage(&id);
    if w.hose_stuck(&id) {
        // jammed at the blockage: the hose cannot advance until it clears
        if matches!(w.activity(Actor::Primary), Some(a) if a.task == Task::Feed { hole: id.clone() }) {
            w.finish(Actor::Primary);
        }
        let why = format!("hose blocked at {:.2} m", w.hose.deployed_mm as f64 / 1000.0);
        return fail(l, why);
    }
    w.drive(Actor::Primary, l.node_id.as_str(), Task::Feed { hole: id.clone() });
    if !w.hose.retracting && w.hose.deployed_mm >= w.hole_depth_mm(&id) {
        w.finish(Actor::Primary);
        w.fed_to_bottom.insert(id);
        return Success;
    }
    Running
}

fn wiggle_hose(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    let id = h.id.to_string();
    let w = &mut l.ctx.world;
    let ticks = w.config.wiggle_ticks;
    if !w.run(Actor::Primary, l.node_id.as_str(), Task::Wiggle { hole: id.clone() }, ticks) {
        return Running;
    }
    let Some(Some(b)) = w.blockages.get(&id).cloned() else {
        return Success;
    };
    if b.cleared || b.persistent {
        return Success;
    }
    let p = w.faults.p_wiggle_clears_blockage;
    let clears = match w.scripted(&id, |k| matches!(k, FaultKind::WiggleOutcome { .. })) {
        Some(FaultKind::WiggleOutcome { clears }) => clears,
        _ => w.rng.bernoulli(Channel::Wiggle, &id, p),
    };
    if clears {
        if let Some(Some(b)) = w.blockages.get_mut(&id) {
            b.cleared = true;
        }
    }
    Success
}

fn pump_emulsion(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    let id = h.id.to_string();
    let target_g = Rig::target_g(&h);
    let w = &mut l.ctx.world;
    if w.pump_completions.get(&id).copied().unwrap_or(0) >= 1 {
        return Success;
    }
    if !w.fed_to_bottom.contains(&id) {
        return fail(l, "hose is not at the bottom of the hole");
    }
    let depth_mm = w.hole_depth_mm(&id);
    w.drive(Actor::Primary, l.node_id.as_str(), Task::Pump { hole: id.clone(), target_g, depth_mm });
    if w.pumped_g.get(&id).copied().unwrap_or(0) < target_g {
        return Running;
    }
    w.finish(Actor::Primary);
    *w.pump_completions.entry(id.clone()).or_insert(0) += 1;
    w.hose.tip_loaded = false;
    w.hose.deployed_mm = 0;
    w.hose.in_hole = None;
    w.primed.insert(id);
    Success
}

fn mark_hole_charged(l: L) -> Status {
    let Some(h) = hole(l) else {
        return fail(l, "no current hole");
    };
    if h.state == HoleState::Charged {
        return Success;
    }
    if l.ctx.world.pump_completions.get(h.id.as_str()).copied().unwrap_or(0) == 0 {
        return fail(l, "hole has not been pumped");
    }
    match l.ctx.site.set_state(&h.id, HoleState::Charged) {
        Ok(()) => Success,
        Err(e) => fail(l, e.to_string()),
    }
}

fn mission_queue_empty(l: L) -> Status {
    (l.ctx.site.queue_len() == 0 && current_is_charging(l.ctx, l.blackboard).is_none()).into()
}

/// No detonator is in hand and every hole still needing one is covered by
/// the one already in the hose tip, if any.
fn preparation_queue_empty(l: L) -> Status {
    let w = &l.ctx.world;
    if w.secondary.holding_detonator {
        return Failure;
    }
    let current = current_is_charging(l.ctx, l.blackboard).filter(|id| !w.primed.contains(id));
    let remaining = l.ctx.site.queue_len() + usize::from(current.is_some());
    (remaining <= usize::from(w.hose.tip_loaded)).into()
}

fn at_hole(l: L) -> Status {
    match hole(l) {
        Some(h) => (l.ctx.world.tool_at.as_deref() == Some(h.id.as_str())).into(),
        None => Failure,
    }
}

fn hole_charged(l: L) -> Status {
    hole(l).is_some_and(|h| h.state == HoleState::Charged).into()
}

/// Register every mission leaf.
pub fn register_leaves(reg: &mut BehaviorRegistry<Rig>) -> Result<(), BtError> {
    reg.register_action("ScanFace", Step(scan_face))?;
    reg.register_action("DetectHoles", Step(detect_holes))?;
    reg.register_action("GeneratePlan", Step(generate_plan))?;
    reg.register_action("PeekNextHole", Step(peek_next_hole))?;
    reg.register_action("AssembleDetonator", Step(assemble_detonator))?;
    reg.register_action("InsertDetonatorInHoseTip", Step(insert_detonator))?;
    reg.register_action("HandoverGive", Handover(handover_give))?;
    reg.register_action("HandoverTake", Handover(handover_take))?;
    reg.register_action("PopHole", Step(pop_hole))?;
    reg.register_action("MoveBoomToRegion", Step(move_boom))?;
    reg.register_action("PositionAtHole", Step(position_at_hole))?;
    reg.register_action("SweepSearch", Step(sweep_search))?;
    reg.register_action("FeedHose", Step(feed_hose))?;
    reg.register_action("WiggleHose", Step(wiggle_hose))?;
    reg.register_action("PumpEmulsionWhileRetracting", Step(pump_emulsion))?;
    reg.register_action("MarkHoleCharged", Step(mark_hole_charged))?;
    reg.register_condition("PlanUpToDate", |l: L| Status::from(l.ctx.site.plan_is_current()))?;
    reg.register_condition("IsRobotHoldingDetonator", |l: L| {
        Status::from(l.ctx.world.secondary.holding_detonator)
    })?;
    reg.register_condition("PreparationQueueEmpty", preparation_queue_empty)?;
    reg.register_condition("MissionQueueEmpty", mission_queue_empty)?;
    reg.register_condition("AtHole", at_hole)?;
    reg.register_condition("HoleCharged", hole_charged)?;
    Ok(())
}

pub fn registry() -> BehaviorRegistry<Rig> {
    let mut reg = BehaviorRegistry::new();
    register_leaves(&mut reg).expect("leaf names are unique");
    reg
}
