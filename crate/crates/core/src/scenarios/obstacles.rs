//! Linear obstacle course along +z.
//!
//! The corridor interior is x in `1..=5` between side walls. Rows are laid out
//! as a spawn area, then per section an obstacle followed by a room; exit pads
//! cover the last two rows of the final room.

use crate::entity::{DynamicObject, ObjectId, ObjectKind};
use crate::grid::{CellKind, VoxelCoord, VoxelGrid};
use crate::material;
use crate::physics::InteractionRules;
use crate::rng::SeededRng;

use super::{layout, Layout, ObstaclesData, ScenarioData, ScenarioParams, Spawn};

pub const CORRIDOR_MIN_X: i32 = 1;
pub const CORRIDOR_MAX_X: i32 = 5;
pub const CENTER_X: i32 = 3;
const SPAWN_ROWS: i32 = 4;
const ROOM_ROWS: i32 = 5;
const EXIT_ROWS: i32 = 2;
const WALL_HEIGHT: i32 = 5;
/// Standing height of the spawn area.
const BASE_LEVEL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Obstacle {
    /// Lava rows replacing the floor; jump across.
    LavaPit { width: i32 },
    /// One-cell-high wall; jump onto it.
    StepWall,
    /// Two-cell-high wall; place a box against it first.
    StackWall,
    /// Three-row chasm whose far side is one cell higher; only reachable by
    /// jumping off a box placed at the near edge.
    RaisedGap,
}

impl Obstacle {
    pub fn rows(self) -> i32 {
        match self {
            Obstacle::LavaPit { width } => width,
            Obstacle::StepWall | Obstacle::StackWall => 1,
            Obstacle::RaisedGap => 3,
        }
    }

    pub fn needs_box(self) -> bool {
        matches!(self, Obstacle::StackWall | Obstacle::RaisedGap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Section {
    pub obstacle: Obstacle,
    /// First obstacle row.
    pub z: i32,
    /// Standing height before the obstacle.
    pub level: i32,
}

pub(crate) fn generate(rng: &mut SeededRng, num_agents: usize, p: &ScenarioParams, hard: bool) -> Layout {
    let rooms = p.rooms as i32;
    let mut sections = Vec::new();
    let mut z = 1 + SPAWN_ROWS;
    let mut level = BASE_LEVEL;
    for _ in 0..rooms {
        let obstacle = if hard {
            match rng.below(4) {
                0 => Obstacle::LavaPit {
                    width: rng.range_inclusive(1, 2) as i32,
                },
                1 => Obstacle::StepWall,
                2 => Obstacle::StackWall,
                _ => Obstacle::RaisedGap,
            }
        } else if rng.chance(0.5) {
            Obstacle::LavaPit { width: 1 }
        } else {
            Obstacle::StepWall
        };
        sections.push(Section { obstacle, z, level });
        if obstacle == Obstacle::RaisedGap {
            level += 1;
        }
        z += obstacle.rows() + ROOM_ROWS;
    }
    let end_z = z;
    let nz = (end_z + 1) as usize;
    let ny = (level + WALL_HEIGHT + 2) as usize;
    let mut g = VoxelGrid::new(7, ny, nz);

    // Floor under every row, then carve the obstacles.
    let mut row_level = vec![BASE_LEVEL; nz];
    for s in &sections {
        let after = s.z + s.obstacle.rows();
        let next = if s.obstacle == Obstacle::RaisedGap { s.level + 1 } else { s.level };
        for zz in after..nz as i32 {
            row_level[zz as usize] = next;
        }
    }
    for zz in 1..end_z {
        floor_row(&mut g, zz, row_level[zz as usize]);
    }
    for s in &sections {
        let b = s.level;
        match s.obstacle {
            Obstacle::LavaPit { width } => {
                for zz in s.z..s.z + width {
                    for x in CORRIDOR_MIN_X..=CORRIDOR_MAX_X {
                        g.set(VoxelCoord::new(x, b - 1, zz), CellKind::Lava);
                    }
                }
            }
            Obstacle::StepWall | Obstacle::StackWall => {
                let h = if s.obstacle == Obstacle::StepWall { 1 } else { 2 };
                g.fill(
                    VoxelCoord::new(CORRIDOR_MIN_X, b, s.z),
                    VoxelCoord::new(CORRIDOR_MAX_X, b + h - 1, s.z),
                    CellKind::Solid(material::OBSTACLE),
                );
            }
            Obstacle::RaisedGap => {
                g.fill(
                    VoxelCoord::new(CORRIDOR_MIN_X, 0, s.z),
                    VoxelCoord::new(CORRIDOR_MAX_X, ny as i32 - 1, s.z + 2),
                    CellKind::Empty,
                );
            }
        }
    }
    let top = ny as i32 - 1;
    for zz in 0..nz as i32 {
        for y in 0..=top {
            g.set(VoxelCoord::new(0, y, zz), CellKind::Solid(material::WALL));
            g.set(VoxelCoord::new(6, y, zz), CellKind::Solid(material::WALL));
        }
    }
    for zz in [0, end_z] {
        g.fill(
            VoxelCoord::new(CORRIDOR_MIN_X, 0, zz),
            VoxelCoord::new(CORRIDOR_MAX_X, top, zz),
            CellKind::Solid(material::WALL),
        );
    }
    let final_level = row_level[(end_z - 1) as usize];
    for zz in end_z - EXIT_ROWS..end_z {
        for x in CORRIDOR_MIN_X..=CORRIDOR_MAX_X {
            g.set(VoxelCoord::new(x, final_level, zz), CellKind::ExitPad);
        }
    }

    // Boxes two rows before each obstacle that needs one, plus a spare.
    let mut objects = Vec::new();
    let mut reserved = Vec::new();
    for s in sections.iter().filter(|s| s.obstacle.needs_box()) {
        let main = VoxelCoord::new(CENTER_X, s.level, s.z - 2);
        let spare_x = if rng.chance(0.5) { CORRIDOR_MIN_X } else { CORRIDOR_MAX_X };
        let spare = VoxelCoord::new(spare_x, s.level, s.z - 2);
        for c in [main, spare] {
            objects.push(DynamicObject::new(ObjectId(objects.len() as u32), ObjectKind::MovableBox, c));
            reserved.push(c);
        }
    }

    let mut spawn_cells: Vec<VoxelCoord> = (1..=SPAWN_ROWS)
        .flat_map(|zz| (CORRIDOR_MIN_X..=CORRIDOR_MAX_X).map(move |x| VoxelCoord::new(x, BASE_LEVEL, zz)))
        .filter(|c| !reserved.contains(c))
        .collect();
    spawn_cells.sort_by_key(|c| (c.z, (c.x - CENTER_X).abs(), c.x));
    let spawns: Vec<Spawn> = spawn_cells.iter().map(|&c| Spawn::in_cell(c, 0.0)).collect();

    // Diamonds in the rooms, away from boxes and exit rows.
    let mut room_cells = Vec::new();
    for s in &sections {
        let start = s.z + s.obstacle.rows();
        for zz in start..start + ROOM_ROWS {
            if zz >= end_z - EXIT_ROWS {
                continue;
            }
            let lvl = row_level[zz as usize];
            for x in CORRIDOR_MIN_X..=CORRIDOR_MAX_X {
                let c = VoxelCoord::new(x, lvl, zz);
                if !reserved.contains(&c) && layout::standable(&g, c) {
                    room_cells.push(c);
                }
            }
        }
    }
    let n_diamonds = (p.diamonds as usize).min(room_cells.len());
    for c in layout::pick(rng, &room_cells, n_diamonds) {
        objects.push(DynamicObject::new(ObjectId(objects.len() as u32), ObjectKind::GreenDiamond, c));
    }

    Layout {
        grid: g,
        objects,
        spawns,
        decorations: Vec::new(),
        data: ScenarioData::Obstacles(ObstaclesData {
            reached: vec![false; num_agents],
            course: sections,
            exit_z: end_z - EXIT_ROWS,
        }),
        rules: InteractionRules {
            carry: true,
            push: false,
        },
    }
}

fn floor_row(g: &mut VoxelGrid, z: i32, level: i32) {
    for x in CORRIDOR_MIN_X..=CORRIDOR_MAX_X {
        for y in 0..level {
            let m = if y == level - 1 { material::FLOOR } else { material::PILLAR };
            g.set(VoxelCoord::new(x, y, z), CellKind::Solid(m));
        }
    }
}
