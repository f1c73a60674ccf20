//! Hexagonal mazes carved by depth-first backtracking, voxelized into prisms.
//!
//! Hex cells use axial coordinates `(q, r)` within `radius` of the origin.
//! Each voxel column is assigned to its nearest hex center; columns close to
//! the bisector between two cells whose shared edge is closed become wall, as
//! do columns near a corner where three cells meet.

use std::collections::VecDeque;

use crate::entity::{DynamicObject, ObjectId, ObjectKind, SHAPE_SIZES};
use crate::grid::{CellKind, VoxelCoord, VoxelGrid};
use crate::material::{self, NUM_SHAPE_COLORS};
use crate::math::{Aabb, Vec3};
use crate::physics::InteractionRules;
use crate::render::SceneBox;
use crate::rng::SeededRng;

use super::{HexExploreData, HexMemoryData, Layout, ScenarioData, ScenarioParams, Spawn};

/// Distance between neighboring cell centers, in voxels.
pub const SPACING: f64 = 5.0;
/// Half-thickness band around a closed edge, measured as `d2 - d1`.
const WALL_BAND: f64 = 1.2;
const WALL_TOP: i32 = 3;
const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HexCoord {
    pub q: i32,
    pub r: i32,
}

impl HexCoord {
    pub const DIRECTIONS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

    pub fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    pub fn neighbors(self) -> impl Iterator<Item = HexCoord> {
        Self::DIRECTIONS.into_iter().map(move |(dq, dr)| HexCoord::new(self.q + dq, self.r + dr))
    }

    /// Hex steps from the origin.
    pub fn ring(self) -> i32 {
        (self.q.abs() + self.r.abs() + (self.q + self.r).abs()) / 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HexMaze {
    pub radius: i32,
    pub cells: Vec<HexCoord>,
    /// Open passages as sorted index pairs.
    pub passages: Vec<(usize, usize)>,
    /// World position of the axial origin.
    pub origin: (f64, f64),
}

impl HexMaze {
    pub fn index_of(&self, h: HexCoord) -> Option<usize> {
        self.cells.binary_search(&h).ok()
    }

    pub fn is_open(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.passages.binary_search(&key).is_ok()
    }

    pub fn open_neighbors(&self, i: usize) -> Vec<usize> {
        self.cells[i]
            .neighbors()
            .filter_map(|n| self.index_of(n))
            .filter(|&j| self.is_open(i, j))
            .collect()
    }

    /// Graph distance from `from` to every cell through open passages.
    pub fn distances(&self, from: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.cells.len()];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            for n in self.open_neighbors(c) {
                if dist[n] == u32::MAX {
                    dist[n] = dist[c] + 1;
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Two cells at maximal graph distance (double-sweep; exact on trees).
    pub fn diameter(&self) -> (usize, usize, u32) {
        let d0 = self.distances(0);
        let a = argmax(&d0);
        let da = self.distances(a);
        let b = argmax(&da);
        (a, b, da[b])
    }

    pub fn center(&self, i: usize) -> (f64, f64) {
        let h = self.cells[i];
        axial_to_world(h, self.origin)
    }

    /// Floor-level voxel at the center of cell `i`.
    pub fn center_voxel(&self, i: usize) -> VoxelCoord {
        let (x, z) = self.center(i);
        VoxelCoord::new(x.floor() as i32, 1, z.floor() as i32)
    }
}

fn argmax(v: &[u32]) -> usize {
    let mut best = 0;
    for (i, &d) in v.iter().enumerate() {
        if d != u32::MAX && d > v[best] {
            best = i;
        }
    }
    best
}

fn axial_to_world(h: HexCoord, origin: (f64, f64)) -> (f64, f64) {
    (
        origin.0 + SPACING * (h.q as f64 + h.r as f64 / 2.0),
        origin.1 + SPACING * (h.r as f64 * SQRT3 / 2.0),
    )
}

fn world_to_axial_rounded(x: f64, z: f64, origin: (f64, f64)) -> HexCoord {
    let r = (z - origin.1) / SPACING * 2.0 / SQRT3;
    let q = (x - origin.0) / SPACING - r / 2.0;
    let s = -q - r;
    let (mut rq, mut rr, rs) = (q.round(), r.round(), s.round());
    let (dq, dr, ds) = ((rq - q).abs(), (rr - r).abs(), (rs - s).abs());
    if dq > dr && dq > ds {
        rq = -rr - rs;
    } else if dr > ds {
        rr = -rq - rs;
    }
    HexCoord::new(rq as i32, rr as i32)
}

/// Depth-first backtracking over all cells within `radius`.
pub fn carve_maze(rng: &mut SeededRng, radius: i32) -> HexMaze {
    let mut cells = Vec::new();
    for q in -radius..=radius {
        for r in -radius..=radius {
            let h = HexCoord::new(q, r);
            if h.ring() <= radius {
                cells.push(h);
            }
        }
    }
    cells.sort();
    let mut maze = HexMaze {
        radius,
        cells,
        passages: Vec::new(),
        origin: (0.0, 0.0),
    };
    let n = maze.cells.len();
    let mut visited = vec![false; n];
    let start = rng.below(n as u64) as usize;
    visited[start] = true;
    let mut stack = vec![start];
    while let Some(&top) = stack.last() {
        let options: Vec<usize> = maze.cells[top]
            .neighbors()
            .filter_map(|h| maze.index_of(h))
            .filter(|&j| !visited[j])
            .collect();
        match rng.choose(&options) {
            Some(&next) => {
                visited[next] = true;
                maze.passages.push((top.min(next), top.max(next)));
                stack.push(next);
            }
            None => {
                stack.pop();
            }
        }
    }
    maze.passages.sort();
    let extent_x = SPACING * (radius as f64 + 1.0);
    let extent_z = SPACING * (radius as f64 * SQRT3 / 2.0 + 1.0);
    maze.origin = (extent_x.ceil() + 1.0, extent_z.ceil() + 1.0);
    maze
}

/// Voxelizes the maze: floor everywhere, wall prisms on closed edges.
pub fn voxelize(maze: &HexMaze) -> VoxelGrid {
    let nx = (2.0 * maze.origin.0) as usize + 1;
    let nz = (2.0 * maze.origin.1) as usize + 1;
    let mut g = VoxelGrid::new(nx, WALL_TOP as usize + 2, nz);
    g.fill(
        VoxelCoord::new(0, 0, 0),
        VoxelCoord::new(nx as i32 - 1, 0, nz as i32 - 1),
        CellKind::Solid(material::FLOOR),
    );
    for z in 0..nz as i32 {
        for x in 0..nx as i32 {
            if is_wall(maze, x as f64 + 0.5, z as f64 + 0.5) {
                g.fill(
                    VoxelCoord::new(x, 1, z),
                    VoxelCoord::new(x, WALL_TOP, z),
                    CellKind::Solid(material::HEX_WALL),
                );
            }
        }
    }
    g
}

fn is_wall(maze: &HexMaze, x: f64, z: f64) -> bool {
    let home = world_to_axial_rounded(x, z, maze.origin);
    let mut near: Vec<(f64, HexCoord)> = std::iter::once(home)
        .chain(home.neighbors())
        .map(|h| {
            let (cx, cz) = axial_to_world(h, maze.origin);
            (((cx - x).powi(2) + (cz - z).powi(2)).sqrt(), h)
        })
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (d1, h1) = near[0];
    let (d2, h2) = near[1];
    let d3 = near[2].0;
    let i1 = maze.index_of(h1);
    let i2 = maze.index_of(h2);
    match (i1, i2) {
        (None, None) => false,
        (Some(a), Some(b)) => (d2 - d1 < WALL_BAND && !maze.is_open(a, b)) || d3 - d1 < WALL_BAND,
        // boundary of the maze
        _ => d2 - d1 < WALL_BAND || (i1.is_some() && d3 - d1 < WALL_BAND),
    }
}

/// Free cells around the center of `cell`, center first.
fn spawn_points(maze: &HexMaze, grid: &VoxelGrid, cell: usize, yaw: f64) -> Vec<Spawn> {
    let c = maze.center_voxel(cell);
    [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)]
        .iter()
        .map(|&(dx, dz)| c.offset(dx, 0, dz))
        .filter(|&v| !grid.get(v).is_solid())
        .map(|v| Spawn::in_cell(v, yaw))
        .collect()
}

pub(crate) fn generate_explore(rng: &mut SeededRng, _num_agents: usize, p: &ScenarioParams) -> Layout {
    let maze = carve_maze(rng, p.maze_radius as i32);
    let grid = voxelize(&maze);
    let (spawn, _, _) = maze.diameter();
    let dist = maze.distances(spawn);
    let diameter = *dist.iter().max().expect("non-empty maze");
    let far: Vec<usize> = (0..maze.cells.len())
        .filter(|&i| dist[i] as f64 >= 0.7 * diameter as f64)
        .collect();
    let goal = *rng.choose(&far).expect("far cell");
    let objects = vec![DynamicObject::new(ObjectId(0), ObjectKind::PinkDiamond, maze.center_voxel(goal))];
    let yaw = rng.below(6) as f64 * std::f64::consts::PI / 3.0;
    Layout {
        spawns: spawn_points(&maze, &grid, spawn, yaw),
        grid,
        objects,
        decorations: Vec::new(),
        data: ScenarioData::HexExplore(HexExploreData { maze, found: false }),
        rules: InteractionRules::default(),
    }
}

pub(crate) fn generate_memory(rng: &mut SeededRng, _num_agents: usize, p: &ScenarioParams) -> Layout {
    let maze = carve_maze(rng, p.maze_radius as i32);
    let mut grid = voxelize(&maze);
    let n = maze.cells.len();
    let spawn = rng.below(n as u64) as usize;
    let exemplar = (
        rng.below(SHAPE_SIZES.len() as u64) as u8,
        rng.below(NUM_SHAPE_COLORS as u64) as u8,
    );

    // Pedestal one voxel along +x from the spawn center, the agent facing it.
    let center = maze.center_voxel(spawn);
    let pedestal = center.offset(2, 0, 0);
    grid.set(pedestal, CellKind::Solid(material::PEDESTAL));
    let size = SHAPE_SIZES[exemplar.0 as usize];
    let foot = Vec3::new(pedestal.x as f64 + 0.5, 2.05, pedestal.z as f64 + 0.5);
    let decorations = vec![SceneBox {
        aabb: Aabb::from_foot(foot, size),
        material: material::SHAPE_COLOR_BASE + exemplar.1,
    }];

    let mut others: Vec<usize> = (0..n).filter(|&i| i != spawn).collect();
    rng.shuffle(&mut others);
    let k = p.items as usize;
    let mut objects = Vec::new();
    for (j, &cell) in others.iter().take(2 * k).enumerate() {
        let (shape, color) = if j < k {
            exemplar
        } else {
            loop {
                let s = rng.below(SHAPE_SIZES.len() as u64) as u8;
                let c = rng.below(NUM_SHAPE_COLORS as u64) as u8;
                if (s, c) != exemplar {
                    break (s, c);
                }
            }
        };
        objects.push(DynamicObject::new(
            ObjectId(j as u32),
            ObjectKind::CollectibleShape { shape, color },
            maze.center_voxel(cell),
        ));
    }
    let mut spawns = spawn_points(&maze, &grid, spawn, std::f64::consts::FRAC_PI_2);
    spawns.retain(|s| s.position.x < pedestal.x as f64 - 0.5);
    Layout {
        spawns,
        grid,
        objects,
        decorations,
        data: ScenarioData::HexMemory(HexMemoryData {
            maze,
            exemplar,
            matching_left: k as u32,
        }),
        rules: InteractionRules::default(),
    }
}
