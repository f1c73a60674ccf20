//! Open arena with raised platforms, holes into the void, and two colors of diamonds.

use crate::entity::{DynamicObject, ObjectId, ObjectKind};
use crate::grid::{CellKind, VoxelCoord, VoxelGrid};
use crate::material;
use crate::physics::InteractionRules;
use crate::rng::SeededRng;

use super::{layout, CollectData, Layout, ScenarioData, ScenarioParams, Spawn};

const SIZE: i32 = 20;
const WALL_TOP: i32 = 3;
const SPAWN_POINTS: usize = 8;

pub(crate) fn generate(rng: &mut SeededRng, _num_agents: usize, p: &ScenarioParams) -> Layout {
    let mut g = VoxelGrid::new(SIZE as usize, 6, SIZE as usize);
    g.fill(
        VoxelCoord::new(0, 0, 0),
        VoxelCoord::new(SIZE - 1, 0, SIZE - 1),
        CellKind::Solid(material::FLOOR),
    );
    layout::ring(&mut g, 0, 0, SIZE - 1, SIZE - 1, 1, WALL_TOP, material::WALL);

    // Cells claimed by a feature, including a one-cell margin around it.
    let mut claimed = vec![false; (SIZE * SIZE) as usize];
    let idx = |x: i32, z: i32| (z * SIZE + x) as usize;
    let mut try_place = |rng: &mut SeededRng, w_max: i32, d_max: i32, w_min: i32| -> Option<(i32, i32, i32, i32)> {
        for _ in 0..50 {
            let w = rng.range_inclusive(w_min as i64, w_max as i64) as i32;
            let d = rng.range_inclusive(w_min as i64, d_max as i64) as i32;
            let x0 = rng.range_inclusive(2, (SIZE - 2 - w) as i64) as i32;
            let z0 = rng.range_inclusive(2, (SIZE - 2 - d) as i64) as i32;
            let free = (x0 - 1..=x0 + w).all(|x| (z0 - 1..=z0 + d).all(|z| !claimed[idx(x, z)]));
            if free {
                for x in x0 - 1..=x0 + w {
                    for z in z0 - 1..=z0 + d {
                        claimed[idx(x, z)] = true;
                    }
                }
                return Some((x0, z0, x0 + w - 1, z0 + d - 1));
            }
        }
        None
    };

    let platforms = rng.range_inclusive(3, 5);
    for _ in 0..platforms {
        if let Some((x0, z0, x1, z1)) = try_place(rng, 3, 4, 2) {
            g.fill(
                VoxelCoord::new(x0, 1, z0),
                VoxelCoord::new(x1, 1, z1),
                CellKind::Solid(material::PLATFORM),
            );
        }
    }
    let mut hole_cells = Vec::new();
    let holes = rng.range_inclusive(2, 4);
    for _ in 0..holes {
        if let Some((x0, z0, x1, z1)) = try_place(rng, 2, 2, 1) {
            g.fill(VoxelCoord::new(x0, 0, z0), VoxelCoord::new(x1, 0, z1), CellKind::VoidBelow);
            for x in x0..=x1 {
                for z in z0..=z1 {
                    hole_cells.push((x, z));
                }
            }
        }
    }
    let near_hole = |c: VoxelCoord| hole_cells.iter().any(|&(x, z)| (x - c.x).abs() <= 1 && (z - c.z).abs() <= 1);

    let floor_cells: Vec<VoxelCoord> = (1..SIZE - 1)
        .flat_map(|z| (1..SIZE - 1).map(move |x| VoxelCoord::new(x, 1, z)))
        .filter(|&c| layout::standable(&g, c) && !near_hole(c))
        .collect();
    let spawn_cells = layout::pick(rng, &floor_cells, SPAWN_POINTS);
    let spawns: Vec<Spawn> = spawn_cells
        .iter()
        .map(|&c| Spawn::in_cell(c, rng.below(4) as f64 * std::f64::consts::FRAC_PI_2))
        .collect();

    let reach = layout::reachable(&g, spawn_cells[0]);
    let mut targets: Vec<VoxelCoord> = reach
        .into_iter()
        .filter(|c| !spawn_cells.contains(c) && !near_hole(*c))
        .collect();
    targets.sort();
    let n = p.diamonds as usize;
    let cells = layout::pick(rng, &targets, 2 * n);
    let mut objects = Vec::new();
    for (k, &c) in cells.iter().enumerate() {
        let kind = if k < n { ObjectKind::GreenDiamond } else { ObjectKind::RedDiamond };
        objects.push(DynamicObject::new(ObjectId(k as u32), kind, c));
    }

    Layout {
        grid: g,
        objects,
        spawns,
        decorations: Vec::new(),
        data: ScenarioData::Collect(CollectData { greens_left: p.diamonds }),
        rules: InteractionRules::default(),
    }
}
