//! The dense voxel lattice holding static level geometry.
//!
//! One cell is one world unit on every axis and `y` is up. Cell `(i, j, k)`
//! spans `[i, i+1) x [j, j+1) x [k, k+1)`. Storage is x-fastest, then z, then
//! y, so `index = (y * nz + z) * nx + x`.

use crate::material::MaterialId;
use crate::math::{Aabb, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VoxelCoord {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl VoxelCoord {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn offset(self, dx: i32, dy: i32, dz: i32) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }

    pub fn below(self) -> Self {
        self.offset(0, -1, 0)
    }

    pub fn above(self) -> Self {
        self.offset(0, 1, 0)
    }

    pub fn aabb(self) -> Aabb {
        Aabb::cell(self.x, self.y, self.z)
    }

    pub fn center(self) -> Vec3 {
        voxel_to_world_center(self)
    }
}

/// Floor of each component.
pub fn world_to_voxel(p: Vec3) -> VoxelCoord {
    VoxelCoord::new(p.x.floor() as i32, p.y.floor() as i32, p.z.floor() as i32)
}

pub fn voxel_to_world_center(c: VoxelCoord) -> Vec3 {
    Vec3::new(c.x as f64 + 0.5, c.y as f64 + 0.5, c.z as f64 + 0.5)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CellKind {
    #[default]
    Empty,
    Solid(MaterialId),
    Lava,
    ExitPad,
    BoxTarget,
    BuildZone,
    /// Marks a hole with nothing underneath; agents falling through it leave the level.
    VoidBelow,
}

impl CellKind {
    pub fn is_solid(self) -> bool {
        matches!(self, CellKind::Solid(_))
    }

    pub fn trigger(self) -> Option<TriggerKind> {
        match self {
            CellKind::Lava => Some(TriggerKind::Lava),
            CellKind::ExitPad => Some(TriggerKind::ExitPad),
            CellKind::BoxTarget => Some(TriggerKind::BoxTarget),
            CellKind::BuildZone => Some(TriggerKind::BuildZone),
            _ => None,
        }
    }
}

/// Non-colliding cell kinds whose penetration is reported as an event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriggerKind {
    Lava,
    ExitPad,
    BoxTarget,
    BuildZone,
}

impl TriggerKind {
    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub const ALL: [TriggerKind; 4] = [
        TriggerKind::Lava,
        TriggerKind::ExitPad,
        TriggerKind::BoxTarget,
        TriggerKind::BuildZone,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoxelGrid {
    dims: (usize, usize, usize),
    cells: Vec<CellKind>,
}

impl VoxelGrid {
    /// All-empty grid. Panics on a zero dimension or above 256 per axis.
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        assert!(nx > 0 && ny > 0 && nz > 0, "grid dims must be positive");
        assert!(nx <= 256 && ny <= 256 && nz <= 256, "grid larger than 256^3");
        Self {
            dims: (nx, ny, nz),
            cells: vec![CellKind::Empty; nx * ny * nz],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn in_bounds(&self, c: VoxelCoord) -> bool {
        let (nx, ny, nz) = self.dims;
        c.x >= 0
            && c.y >= 0
            && c.z >= 0
            && (c.x as usize) < nx
            && (c.y as usize) < ny
            && (c.z as usize) < nz
    }

    pub fn index(&self, c: VoxelCoord) -> Option<usize> {
        self.in_bounds(c).then(|| {
            let (nx, _, nz) = self.dims;
            (c.y as usize * nz + c.z as usize) * nx + c.x as usize
        })
    }

    pub fn coord_of(&self, index: usize) -> VoxelCoord {
        let (nx, _, nz) = self.dims;
        let x = index % nx;
        let z = (index / nx) % nz;
        let y = index / (nx * nz);
        VoxelCoord::new(x as i32, y as i32, z as i32)
    }

    /// Out-of-bounds lookups yield `Empty`.
    pub fn get(&self, c: VoxelCoord) -> CellKind {
        self.index(c).map_or(CellKind::Empty, |i| self.cells[i])
    }

    pub fn set(&mut self, c: VoxelCoord, kind: CellKind) {
        let i = self
            .index(c)
            .unwrap_or_else(|| panic!("set out of bounds at {c:?}"));
        self.cells[i] = kind;
    }

    /// Sets every in-bounds cell of the inclusive box `[lo, hi]`.
    pub fn fill(&mut self, lo: VoxelCoord, hi: VoxelCoord, kind: CellKind) {
        for y in lo.y..=hi.y {
            for z in lo.z..=hi.z {
                for x in lo.x..=hi.x {
                    let c = VoxelCoord::new(x, y, z);
                    if self.in_bounds(c) {
                        self.set(c, kind);
                    }
                }
            }
        }
    }

    pub fn solid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_solid()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VoxelCoord, CellKind)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, &k)| (self.coord_of(i), k))
    }
}
