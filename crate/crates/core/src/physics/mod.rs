//! Kinematic simulation: one physics step per rendered frame.
//!
//! Agents are moved with axis-separated swept boxes (x, then z, then y)
//! against static geometry, free block objects, and the other agents. Agents
//! are processed strictly in index order, so agent `i` sees the already
//! updated positions of agents `0..i`.

mod interact;
mod raycast;

pub use interact::{interact, is_cell_free, is_supported_cell, settle_objects, stack_height};
pub use raycast::{ray_box, raycast, HitTarget, RayHit};

use std::f64::consts::PI;

use crate::action::{Action, Gaze, Interact, Jump, Move, Strafe, Turn};
use crate::entity::{AgentState, DynamicObject, ObjectId, ObjectKind, ObjectState};
use crate::error::{Result, SimError};
use crate::grid::{TriggerKind, VoxelCoord};
use crate::math::{Aabb, Axis, Vec3};
use crate::meshing::StaticGeometry;

/// Contact tolerance used by every sweep and overlap test.
pub const CONTACT_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicsParams {
    pub move_speed: f64,
    pub strafe_speed: f64,
    /// Radians per second.
    pub turn_rate: f64,
    /// Radians per second.
    pub gaze_rate: f64,
    pub gravity: f64,
    pub jump_velocity: f64,
    pub dt: f64,
    pub step_height: f64,
    pub interact_reach: f64,
    /// Agents whose feet drop below this height have fallen into the void.
    pub void_height: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            move_speed: 4.0,
            strafe_speed: 4.0,
            turn_rate: PI / 2.0,
            gaze_rate: PI / 4.0,
            gravity: -18.0,
            jump_velocity: 7.0,
            dt: 1.0 / 15.0,
            step_height: 0.55,
            interact_reach: 2.0,
            void_height: -4.0,
        }
    }
}

impl PhysicsParams {
    /// Closed-form continuous jump apex, `v^2 / 2|g|`.
    pub fn jump_apex(&self) -> f64 {
        self.jump_velocity * self.jump_velocity / (2.0 * self.gravity.abs())
    }
}

/// Which object interactions a scenario enables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InteractionRules {
    /// Blocks can be picked up and placed with the interact head.
    pub carry: bool,
    /// Walking into a block pushes it one cell.
    pub push: bool,
}

impl Default for InteractionRules {
    fn default() -> Self {
        Self {
            carry: true,
            push: false,
        }
    }
}

/// Dynamic part of an environment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct World {
    pub agents: Vec<AgentState>,
    pub objects: Vec<DynamicObject>,
}

impl World {
    pub fn object_index(&self, id: ObjectId) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn object(&self, id: ObjectId) -> Option<&DynamicObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement {
    pub object: ObjectId,
    pub cell: VoxelCoord,
    /// 1 + number of blocks stacked directly beneath the placed one.
    pub height: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Push {
    pub object: ObjectId,
    pub from: VoxelCoord,
    pub to: VoxelCoord,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AgentEvents {
    /// Trigger kinds newly overlapped this step, as [`TriggerKind::bit`] flags.
    pub entered: u8,
    pub picked_up: Option<ObjectId>,
    pub placed: Option<Placement>,
    pub pushed: Vec<Push>,
    pub collected: Vec<(ObjectId, ObjectKind)>,
    pub fell_into_void: bool,
    pub reached_exit: bool,
}

impl AgentEvents {
    pub fn entered(&self, kind: TriggerKind) -> bool {
        self.entered & kind.bit() != 0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepEvents {
    pub agents: Vec<AgentEvents>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColliderRef {
    Static,
    Object(usize),
    Agent,
}

/// Advances every agent by one step. Rejects a wrong action count.
pub fn step_environment(
    world: &mut World,
    actions: &[Action],
    geom: &StaticGeometry,
    params: &PhysicsParams,
    rules: &InteractionRules,
) -> Result<StepEvents> {
    if actions.len() != world.agents.len() {
        return Err(SimError::ActionCount {
            expected: world.agents.len(),
            got: actions.len(),
        });
    }
    let mut events = StepEvents {
        agents: vec![AgentEvents::default(); world.agents.len()],
    };
    let mut colliders: Vec<(Aabb, ColliderRef)> = Vec::new();
    for (i, action) in actions.iter().enumerate() {
        let ev = &mut events.agents[i];
        rotate(&mut world.agents[i], action, params);
        move_agent(world, i, action, geom, params, rules, &mut colliders, ev);
        if action.interact == Interact::Interact {
            interact(world, i, geom, params, rules, ev);
        }
        attach_carried(world, i);
        touch_pickups(world, i, ev);
        update_triggers(world, i, geom, params, ev);
    }
    Ok(events)
}

fn rotate(agent: &mut AgentState, a: &Action, p: &PhysicsParams) {
    let turn = match a.turn {
        Turn::NoOp => 0.0,
        Turn::Left => 1.0,
        Turn::Right => -1.0,
    };
    if turn != 0.0 {
        let yaw = agent.pose.yaw + turn * p.turn_rate * p.dt;
        agent.pose.set_yaw(yaw);
    }
    let gaze = match a.gaze {
        Gaze::NoOp => 0.0,
        Gaze::Up => 1.0,
        Gaze::Down => -1.0,
    };
    if gaze != 0.0 {
        let pitch = agent.pose.pitch + gaze * p.gaze_rate * p.dt;
        agent.pose.set_pitch(pitch);
    }
}

/// Overlap on the two axes other than `axis`, by more than the contact tolerance.
fn overlaps_across(a: &Aabb, b: &Aabb, axis: Axis) -> bool {
    Axis::ALL
        .iter()
        .filter(|&&k| k != axis)
        .all(|&k| a.min[k] + CONTACT_EPS < b.max[k] && b.min[k] + CONTACT_EPS < a.max[k])
}

/// Largest signed displacement not exceeding `d` along `axis` before `moving`
/// touches a collider ahead of it. Colliders already interpenetrated are ignored.
fn sweep(moving: &Aabb, axis: Axis, d: f64, colliders: &[(Aabb, ColliderRef)]) -> (f64, Option<usize>) {
    let mut allowed = d;
    let mut blocker = None;
    if d == 0.0 {
        return (0.0, None);
    }
    for (k, (c, _)) in colliders.iter().enumerate() {
        if !overlaps_across(moving, c, axis) {
            continue;
        }
        if d > 0.0 {
            if c.min[axis] >= moving.max[axis] - CONTACT_EPS {
                let gap = (c.min[axis] - moving.max[axis]).max(0.0);
                if gap < allowed {
                    allowed = gap;
                    blocker = Some(k);
                }
            }
        } else if c.max[axis] <= moving.min[axis] + CONTACT_EPS {
            let gap = (c.max[axis] - moving.min[axis]).min(0.0);
            if gap > allowed {
                allowed = gap;
                blocker = Some(k);
            }
        }
    }
    (allowed, blocker)
}

fn gather_colliders(
    world: &World,
    me: usize,
    region: &Aabb,
    geom: &StaticGeometry,
    out: &mut Vec<(Aabb, ColliderRef)>,
) {
    out.clear();
    geom.for_each_candidate(region, |_, b| {
        if b.aabb.overlaps(region) {
            out.push((b.aabb, ColliderRef::Static));
        }
    });
    for (k, o) in world.objects.iter().enumerate() {
        if o.is_free() && o.kind.is_block() && o.aabb.overlaps(region) {
            out.push((o.aabb, ColliderRef::Object(k)));
        }
    }
    for (j, a) in world.agents.iter().enumerate() {
        if j != me {
            let b = a.aabb();
            if b.overlaps(region) {
                out.push((b, ColliderRef::Agent));
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn move_agent(
    world: &mut World,
    i: usize,
    action: &Action,
    geom: &StaticGeometry,
    params: &PhysicsParams,
    rules: &InteractionRules,
    colliders: &mut Vec<(Aabb, ColliderRef)>,
    ev: &mut AgentEvents,
) {
    let agent = &world.agents[i];
    let fwd = match action.movement {
        Move::NoOp => 0.0,
        Move::Forward => 1.0,
        Move::Backward => -1.0,
    };
    let side = match action.strafe {
        Strafe::NoOp => 0.0,
        Strafe::Left => -1.0,
        Strafe::Right => 1.0,
    };
    let horizontal = (agent.pose.forward_flat() * (fwd * params.move_speed)
        + agent.pose.right_flat() * (side * params.strafe_speed))
        * params.dt;
    let jumping = action.jump == Jump::Jump && agent.grounded;

    let start = agent.aabb();
    let reach = horizontal.x.abs().max(horizontal.z.abs())
        + params.jump_velocity.abs().max(agent.vertical_velocity.abs()) * params.dt
        + params.gravity.abs() * params.dt * params.dt
        + params.step_height
        + 0.1;
    let region = Aabb {
        min: start.min - Vec3::splat(reach),
        max: start.max + Vec3::splat(reach),
    };
    gather_colliders(world, i, &region, geom, colliders);

    let agent = &mut world.agents[i];
    if agent.grounded && !jumping {
        let (down, _) = sweep(&agent.aabb(), Axis::Y, -1e-3, colliders);
        if down <= -1e-3 {
            agent.grounded = false;
        }
    }
    let was_grounded = agent.grounded;
    if jumping {
        agent.vertical_velocity = params.jump_velocity;
        agent.grounded = false;
    }
    if agent.grounded {
        agent.vertical_velocity = 0.0;
    } else {
        agent.vertical_velocity += params.gravity * params.dt;
    }

    let dominant = if horizontal.x.abs() >= horizontal.z.abs() { Axis::X } else { Axis::Z };
    for axis in [Axis::X, Axis::Z] {
        let d = horizontal[axis];
        if d == 0.0 {
            continue;
        }
        let current = world.agents[i].aabb();
        let (allowed, blocker) = sweep(&current, axis, d, colliders);
        let mut shift = Vec3::ZERO.with_axis(axis, allowed);
        if (allowed - d).abs() > CONTACT_EPS {
            let mut pushed = false;
            if let (true, true, Some(k)) = (rules.push, axis == dominant, blocker) {
                if let ColliderRef::Object(obj) = colliders[k].1 {
                    let dir = if d > 0.0 { 1 } else { -1 };
                    if let Some(p) = interact::try_push(world, obj, axis, dir, geom) {
                        colliders[k].0 = world.objects[obj].aabb;
                        ev.pushed.push(p);
                        pushed = true;
                    }
                }
            }
            if !pushed && was_grounded && params.step_height > 0.0 {
                if let Some(s) = step_up(&current, axis, d, allowed, params.step_height, colliders) {
                    shift = s;
                }
            }
        }
        world.agents[i].pose.position += shift;
    }

    let agent = &mut world.agents[i];
    let dy = agent.vertical_velocity * params.dt;
    if dy != 0.0 {
        let (allowed, blocker) = sweep(&agent.aabb(), Axis::Y, dy, colliders);
        agent.pose.position.y += allowed;
        if blocker.is_some() {
            if dy < 0.0 {
                agent.grounded = true;
            }
            agent.vertical_velocity = 0.0;
        } else {
            agent.grounded = false;
        }
    }
    if agent.pose.position.y < params.void_height {
        ev.fell_into_void = true;
    }
}

/// Lift by up to `step_height`, retry the horizontal sweep, then settle back down.
fn step_up(
    current: &Aabb,
    axis: Axis,
    d: f64,
    allowed: f64,
    step_height: f64,
    colliders: &[(Aabb, ColliderRef)],
) -> Option<Vec3> {
    let (lift, _) = sweep(current, Axis::Y, step_height, colliders);
    if lift <= CONTACT_EPS {
        return None;
    }
    let lifted = current.translated(Vec3::new(0.0, lift, 0.0));
    let (moved, _) = sweep(&lifted, axis, d, colliders);
    if moved.abs() <= allowed.abs() + CONTACT_EPS {
        return None;
    }
    let shifted = lifted.translated(Vec3::ZERO.with_axis(axis, moved));
    let (down, _) = sweep(&shifted, Axis::Y, -lift, colliders);
    Some(Vec3::ZERO.with_axis(axis, moved) + Vec3::new(0.0, lift + down, 0.0))
}

/// Offset of a carried object's center from the carrier's feet, in the yaw frame.
pub const CARRY_FORWARD: f64 = 1.2;
pub const CARRY_HEIGHT: f64 = 0.9;

pub fn attach_carried(world: &mut World, i: usize) {
    let Some(id) = world.agents[i].carrying else { return };
    let pose = world.agents[i].pose;
    if let Some(o) = world.objects.iter_mut().find(|o| o.id == id) {
        let center = pose.position + pose.forward_flat() * CARRY_FORWARD + Vec3::new(0.0, CARRY_HEIGHT, 0.0);
        o.aabb = Aabb::from_center(center, o.aabb.size());
    }
}

fn touch_pickups(world: &mut World, i: usize, ev: &mut AgentEvents) {
    let body = world.agents[i].aabb();
    world.objects.retain(|o| {
        let hit = o.state == ObjectState::Free && o.kind.is_pickup() && o.aabb.overlaps_by(&body, CONTACT_EPS);
        if hit {
            ev.collected.push((o.id, o.kind));
        }
        !hit
    });
}

fn update_triggers(world: &mut World, i: usize, geom: &StaticGeometry, _params: &PhysicsParams, ev: &mut AgentEvents) {
    let agent = &mut world.agents[i];
    let body = agent.aabb();
    let mut mask = 0u8;
    for t in geom.triggers() {
        if t.aabb.overlaps_by(&body, CONTACT_EPS) {
            mask |= t.kind.bit();
        }
    }
    ev.entered = mask & !agent.touching;
    ev.reached_exit = ev.entered(TriggerKind::ExitPad);
    agent.touching = mask;
}

#[cfg(test)]
mod tests;
