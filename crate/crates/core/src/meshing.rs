//! Merges Solid voxels into disjoint boxes used for collision and rendering.
//!
//! Scan order is y, then z, then x. At each unvisited Solid cell a run is grown
//! along x, the run is extended into a slab along z, and the slab into a block
//! along y; every extension requires the same material and unvisited cells.
//! Materials never merge with each other. Trigger cells (lava, exit pads,
//! box targets, build zones) are kept as one volume per cell.

use std::fmt::Write as _;

use crate::grid::{CellKind, TriggerKind, VoxelCoord, VoxelGrid};
use crate::material::MaterialId;
use crate::math::{Aabb, Vec3};

pub const HASH_CELL_SIZE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergedBox {
    pub aabb: Aabb,
    pub material: MaterialId,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriggerVolume {
    pub aabb: Aabb,
    pub kind: TriggerKind,
    pub cell: VoxelCoord,
}

/// How cells of one material may be grouped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergePolicy {
    /// Full x -> z -> y slab growth.
    Greedy,
    /// Vertical prisms only: cells merge along y, never across columns.
    Column,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticGeometry {
    boxes: Vec<MergedBox>,
    triggers: Vec<TriggerVolume>,
    source_dims: (usize, usize, usize),
    hash: SpatialHash,
}

impl StaticGeometry {
    pub fn boxes(&self) -> &[MergedBox] {
        &self.boxes
    }

    pub fn triggers(&self) -> &[TriggerVolume] {
        &self.triggers
    }

    pub fn source_dims(&self) -> (usize, usize, usize) {
        self.source_dims
    }

    /// Every static box overlapping `probe`, in merge order.
    pub fn collider_query(&self, probe: &Aabb) -> Vec<Aabb> {
        let mut idx = Vec::new();
        self.hash.for_each_candidate(probe, |i| {
            if self.boxes[i].aabb.overlaps(probe) {
                idx.push(i);
            }
        });
        idx.sort_unstable();
        idx.into_iter().map(|i| self.boxes[i].aabb).collect()
    }

    /// Calls `f` once for every box whose bucket range meets `probe`.
    /// Candidates may not overlap `probe`; callers filter.
    pub fn for_each_candidate(&self, probe: &Aabb, mut f: impl FnMut(usize, &MergedBox)) {
        self.hash.for_each_candidate(probe, |i| f(i, &self.boxes[i]));
    }

    /// Plain-text dump, one `box minx miny minz maxx maxy maxz material` line per box.
    pub fn to_box_list(&self) -> String {
        let mut s = String::new();
        for b in &self.boxes {
            let (a, c) = (b.aabb.min, b.aabb.max);
            let _ = writeln!(
                s,
                "box {} {} {} {} {} {} {}",
                a.x, a.y, a.z, c.x, c.y, c.z, b.material
            );
        }
        s
    }
}

/// Merges every Solid material greedily.
pub fn greedy_merge(grid: &VoxelGrid) -> StaticGeometry {
    greedy_merge_with(grid, |_| MergePolicy::Greedy)
}

pub fn greedy_merge_with(
    grid: &VoxelGrid,
    policy: impl Fn(MaterialId) -> MergePolicy,
) -> StaticGeometry {
    let (nx, ny, nz) = grid.dims();
    let mut visited = vec![false; nx * ny * nz];
    let mut boxes = Vec::new();
    let mut triggers = Vec::new();
    let cells = grid.cells();
    let idx = |x: usize, y: usize, z: usize| (y * nz + z) * nx + x;

    for y in 0..ny {
        for z in 0..nz {
            for x in 0..nx {
                let i = idx(x, y, z);
                let kind = cells[i];
                if let Some(t) = kind.trigger() {
                    let cell = VoxelCoord::new(x as i32, y as i32, z as i32);
                    triggers.push(TriggerVolume {
                        aabb: cell.aabb(),
                        kind: t,
                        cell,
                    });
                    continue;
                }
                let CellKind::Solid(mat) = kind else { continue };
                if visited[i] {
                    continue;
                }
                let open = |x: usize, y: usize, z: usize, visited: &[bool]| {
                    let j = idx(x, y, z);
                    !visited[j] && cells[j] == CellKind::Solid(mat)
                };
                let greedy = policy(mat) == MergePolicy::Greedy;

                let mut x_end = x + 1;
                if greedy {
                    while x_end < nx && open(x_end, y, z, &visited) {
                        x_end += 1;
                    }
                }
                let mut z_end = z + 1;
                if greedy {
                    while z_end < nz && (x..x_end).all(|xx| open(xx, y, z_end, &visited)) {
                        z_end += 1;
                    }
                }
                let mut y_end = y + 1;
                while y_end < ny
                    && (z..z_end).all(|zz| (x..x_end).all(|xx| open(xx, y_end, zz, &visited)))
                {
                    y_end += 1;
                }
                for yy in y..y_end {
                    for zz in z..z_end {
                        for xx in x..x_end {
                            visited[idx(xx, yy, zz)] = true;
                        }
                    }
                }
                boxes.push(MergedBox {
                    aabb: Aabb {
                        min: Vec3::new(x as f64, y as f64, z as f64),
                        max: Vec3::new(x_end as f64, y_end as f64, z_end as f64),
                    },
                    material: mat,
                });
            }
        }
    }

    let hash = SpatialHash::build(grid.dims(), &boxes);
    StaticGeometry {
        boxes,
        triggers,
        source_dims: grid.dims(),
        hash,
    }
}

/// Uniform bucket grid over the source lattice, stored as flat CSR lists.
#[derive(Clone, Debug, PartialEq)]
struct SpatialHash {
    buckets: (i32, i32, i32),
    offsets: Vec<u32>,
    entries: Vec<u32>,
    /// First bucket of each box, used to report a box only once per query.
    box_lo: Vec<[i32; 3]>,
}

fn bucket_of(v: f64) -> i32 {
    (v / HASH_CELL_SIZE).floor() as i32
}

impl SpatialHash {
    fn build(dims: (usize, usize, usize), boxes: &[MergedBox]) -> Self {
        let nb = |n: usize| ((n as f64 / HASH_CELL_SIZE).ceil() as i32).max(1);
        let buckets = (nb(dims.0), nb(dims.1), nb(dims.2));
        let total = (buckets.0 * buckets.1 * buckets.2) as usize;
        let flat = |b: [i32; 3]| ((b[1] * buckets.2 + b[2]) * buckets.0 + b[0]) as usize;

        let ranges: Vec<([i32; 3], [i32; 3])> = boxes
            .iter()
            .map(|b| {
                let lo = [bucket_of(b.aabb.min.x), bucket_of(b.aabb.min.y), bucket_of(b.aabb.min.z)];
                // max faces sit on bucket boundaries; nudge inward
                let hi = [
                    bucket_of(b.aabb.max.x - 1e-9),
                    bucket_of(b.aabb.max.y - 1e-9),
                    bucket_of(b.aabb.max.z - 1e-9),
                ];
                (lo, hi)
            })
            .collect();

        let mut counts = vec![0u32; total + 1];
        let each = |lo: [i32; 3], hi: [i32; 3], f: &mut dyn FnMut(usize)| {
            for by in lo[1]..=hi[1] {
                for bz in lo[2]..=hi[2] {
                    for bx in lo[0]..=hi[0] {
                        f(flat([bx, by, bz]));
                    }
                }
            }
        };
        for &(lo, hi) in &ranges {
            each(lo, hi, &mut |b| counts[b + 1] += 1);
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut entries = vec![0u32; offsets[total] as usize];
        for (i, &(lo, hi)) in ranges.iter().enumerate() {
            each(lo, hi, &mut |b| {
                entries[cursor[b] as usize] = i as u32;
                cursor[b] += 1;
            });
        }
        SpatialHash {
            buckets,
            offsets,
            entries,
            box_lo: ranges.iter().map(|r| r.0).collect(),
        }
    }

    fn for_each_candidate(&self, probe: &Aabb, mut f: impl FnMut(usize)) {
        let (bx, by, bz) = self.buckets;
        let lo = [
            bucket_of(probe.min.x).max(0),
            bucket_of(probe.min.y).max(0),
            bucket_of(probe.min.z).max(0),
        ];
        let hi = [
            bucket_of(probe.max.x).min(bx - 1),
            bucket_of(probe.max.y).min(by - 1),
            bucket_of(probe.max.z).min(bz - 1),
        ];
        if lo[0] > hi[0] || lo[1] > hi[1] || lo[2] > hi[2] {
            return;
        }
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                for x in lo[0]..=hi[0] {
                    let b = ((y * bz + z) * bx + x) as usize;
                    let (s, e) = (self.offsets[b] as usize, self.offsets[b + 1] as usize);
                    for &i in &self.entries[s..e] {
                        let blo = self.box_lo[i as usize];
                        // report in the first bucket shared by the box and the query
                        if x == blo[0].max(lo[0]) && y == blo[1].max(lo[1]) && z == blo[2].max(lo[2])
                        {
                            f(i as usize);
                        }
                    }
                }
            }
        }
    }
}
