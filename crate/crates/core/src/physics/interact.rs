use crate::entity::ObjectState;
use crate::grid::{world_to_voxel, VoxelCoord};
use crate::math::{Aabb, Axis, Vec3};
use crate::meshing::StaticGeometry;

use super::{raycast, AgentEvents, HitTarget, InteractionRules, PhysicsParams, Placement, Push, World};

const CELL_EPS: f64 = 1e-6;
/// Vertical distance under which something counts as resting on a surface.
const REST_EPS: f64 = 1e-3;

fn shrunk(c: VoxelCoord) -> Aabb {
    let b = c.aabb();
    Aabb {
        min: b.min + Vec3::splat(CELL_EPS),
        max: b.max - Vec3::splat(CELL_EPS),
    }
}

fn static_solid(geom: &StaticGeometry, c: VoxelCoord) -> bool {
    let probe = shrunk(c);
    let mut hit = false;
    geom.for_each_candidate(&probe, |_, b| hit |= b.aabb.overlaps(&probe));
    hit
}

fn block_at(world: &World, c: VoxelCoord, ignore: Option<usize>) -> Option<usize> {
    let probe = shrunk(c);
    world
        .objects
        .iter()
        .enumerate()
        .find(|(k, o)| Some(*k) != ignore && o.is_free() && o.kind.is_block() && o.aabb.overlaps(&probe))
        .map(|(k, _)| k)
}

/// No static geometry, free block, or agent occupies the cell.
/// `ignore` skips one object by index.
pub fn is_cell_free(world: &World, geom: &StaticGeometry, c: VoxelCoord, ignore: Option<usize>) -> bool {
    let probe = shrunk(c);
    !static_solid(geom, c)
        && block_at(world, c, ignore).is_none()
        && !world.agents.iter().any(|a| a.aabb().overlaps(&probe))
}

/// The cell directly below is static geometry or a free block.
pub fn is_supported_cell(world: &World, geom: &StaticGeometry, c: VoxelCoord, ignore: Option<usize>) -> bool {
    let below = c.below();
    static_solid(geom, below) || block_at(world, below, ignore).is_some()
}

/// 1 + the number of contiguous free blocks directly beneath `c`.
pub fn stack_height(world: &World, c: VoxelCoord) -> u32 {
    let mut h = 1;
    let mut cur = c.below();
    while block_at(world, cur, None).is_some() {
        h += 1;
        cur = cur.below();
    }
    h
}

/// Another block or an agent rests on the object's top face.
pub(super) fn has_load(world: &World, obj: usize) -> bool {
    let top = world.objects[obj].aabb;
    let horiz = |b: &Aabb| {
        b.min.x + CELL_EPS < top.max.x
            && top.min.x + CELL_EPS < b.max.x
            && b.min.z + CELL_EPS < top.max.z
            && top.min.z + CELL_EPS < b.max.z
    };
    let resting = |b: &Aabb| (b.min.y - top.max.y).abs() < REST_EPS && horiz(b);
    world
        .objects
        .iter()
        .enumerate()
        .any(|(k, o)| k != obj && o.is_free() && o.kind.is_block() && resting(&o.aabb))
        || world.agents.iter().any(|a| resting(&a.aabb()))
}

/// Moves a free block one cell along `axis` in direction `dir` (+1/-1) when
/// the destination is empty and supported and nothing rests on the block.
pub(super) fn try_push(world: &mut World, obj: usize, axis: Axis, dir: i32, geom: &StaticGeometry) -> Option<Push> {
    let from = world.objects[obj].cell();
    let to = match axis {
        Axis::X => from.offset(dir, 0, 0),
        Axis::Y => return None,
        Axis::Z => from.offset(0, 0, dir),
    };
    if has_load(world, obj)
        || !is_cell_free(world, geom, to, Some(obj))
        || !is_supported_cell(world, geom, to, Some(obj))
    {
        return None;
    }
    let o = &mut world.objects[obj];
    o.aabb = o.kind.aabb_in_cell(to);
    Some(Push {
        object: o.id,
        from,
        to,
    })
}

/// Pick up the block under the gaze, or place the carried one.
pub fn interact(
    world: &mut World,
    i: usize,
    geom: &StaticGeometry,
    params: &PhysicsParams,
    rules: &InteractionRules,
    ev: &mut AgentEvents,
) {
    if !rules.carry {
        return;
    }
    let pose = world.agents[i].pose;
    let eye = pose.eye();
    let dir = pose.gaze_dir();
    let hit = raycast(eye, dir, params.interact_reach, geom, &world.objects, |o| {
        o.is_free() && o.kind.is_block()
    });
    match world.agents[i].carrying {
        None => {
            let Some(HitTarget::Object(id)) = hit.map(|h| h.target) else { return };
            let Some(k) = world.object_index(id) else { return };
            if has_load(world, k) {
                return;
            }
            world.objects[k].state = ObjectState::Carried(i);
            world.agents[i].carrying = Some(id);
            ev.picked_up = Some(id);
        }
        Some(id) => {
            let Some(k) = world.object_index(id) else {
                world.agents[i].carrying = None;
                return;
            };
            let cell = match hit {
                Some(h) => world_to_voxel(h.point(eye, dir) + h.normal * 0.5),
                None => world_to_voxel(eye + dir * params.interact_reach),
            };
            if !is_cell_free(world, geom, cell, Some(k)) || !is_supported_cell(world, geom, cell, Some(k)) {
                return;
            }
            let o = &mut world.objects[k];
            o.aabb = o.kind.aabb_in_cell(cell);
            o.state = ObjectState::Free;
            world.agents[i].carrying = None;
            ev.placed = Some(Placement {
                object: id,
                cell,
                height: stack_height(world, cell),
            });
        }
    }
}

/// Drops unsupported free blocks until they rest on something. Blocks that
/// fall below `void_height` are removed. Returns the number of blocks moved.
pub fn settle_objects(world: &mut World, geom: &StaticGeometry, void_height: f64) -> usize {
    let mut order: Vec<usize> = (0..world.objects.len())
        .filter(|&k| world.objects[k].is_free() && world.objects[k].kind.is_block())
        .collect();
    order.sort_by(|&a, &b| world.objects[a].aabb.min.y.total_cmp(&world.objects[b].aabb.min.y));
    let mut moved = 0;
    let mut lost = Vec::new();
    for k in order {
        let mut cell = world.objects[k].cell();
        let start = cell;
        while !is_supported_cell(world, geom, cell, Some(k)) && (cell.y as f64) >= void_height {
            cell = cell.below();
        }
        if cell != start {
            moved += 1;
            let o = &mut world.objects[k];
            o.aabb = o.kind.aabb_in_cell(cell);
            if (cell.y as f64) < void_height {
                lost.push(o.id);
            }
        }
    }
    world.objects.retain(|o| !lost.contains(&o.id));
    moved
}
