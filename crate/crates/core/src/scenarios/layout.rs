//! Small grid-building helpers shared by the generators.

use std::collections::{HashSet, VecDeque};

use crate::grid::{CellKind, VoxelCoord, VoxelGrid};
use crate::material::MaterialId;
use crate::rng::SeededRng;

/// Solid perimeter of the rectangle `[x0, x1] x [z0, z1]` for heights `y0..=y1`.
pub fn ring(g: &mut VoxelGrid, x0: i32, z0: i32, x1: i32, z1: i32, y0: i32, y1: i32, m: MaterialId) {
    for y in y0..=y1 {
        for x in x0..=x1 {
            g.set(VoxelCoord::new(x, y, z0), CellKind::Solid(m));
            g.set(VoxelCoord::new(x, y, z1), CellKind::Solid(m));
        }
        for z in z0..=z1 {
            g.set(VoxelCoord::new(x0, y, z), CellKind::Solid(m));
            g.set(VoxelCoord::new(x1, y, z), CellKind::Solid(m));
        }
    }
}

/// An agent can stand in `c`: two free cells on top of solid ground.
pub fn standable(g: &VoxelGrid, c: VoxelCoord) -> bool {
    let free = |k: CellKind| !k.is_solid() && k != CellKind::Lava;
    g.in_bounds(c) && free(g.get(c)) && free(g.get(c.above())) && g.get(c.below()).is_solid()
}

/// Standable cells reachable from `start` by walking, jumping up one cell,
/// or dropping down.
pub fn reachable(g: &VoxelGrid, start: VoxelCoord) -> HashSet<VoxelCoord> {
    let mut seen = HashSet::new();
    if !standable(g, start) {
        return seen;
    }
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    let (_, ny, _) = g.dims();
    while let Some(c) = queue.pop_front() {
        for (dx, dz) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let col = c.offset(dx, 0, dz);
            // jumping up is blocked by a low ceiling above the current cell
            let head_room = !g.get(c.offset(0, 2, 0)).is_solid();
            let top = if head_room { c.y + 1 } else { c.y };
            for y in (0..=top.min(ny as i32 - 1)).rev() {
                let n = VoxelCoord::new(col.x, y, col.z);
                if g.get(n).is_solid() {
                    break;
                }
                if standable(g, n) {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                    break;
                }
            }
        }
    }
    seen
}

/// `n` distinct entries drawn uniformly; panics if there are too few.
pub fn pick<T: Copy>(rng: &mut SeededRng, from: &[T], n: usize) -> Vec<T> {
    assert!(from.len() >= n, "need {n} candidates, have {}", from.len());
    let mut v = from.to_vec();
    rng.shuffle(&mut v);
    v.truncate(n);
    v
}
