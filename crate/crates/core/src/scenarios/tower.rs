//! Arena with loose boxes and a build zone to stack them in.

use crate::entity::{DynamicObject, ObjectId, ObjectKind};
use crate::grid::{CellKind, VoxelCoord, VoxelGrid};
use crate::material;
use crate::physics::{InteractionRules, World};
use crate::rng::SeededRng;

use super::{layout, Layout, ScenarioData, ScenarioParams, Spawn, TowerData};

const SIZE: i32 = 14;
const WALL_TOP: i32 = 3;
const ZONE: i32 = 2;
const SPAWN_POINTS: usize = 8;
/// Head room for tall towers.
const HEIGHT: usize = 16;

pub(crate) fn generate(rng: &mut SeededRng, num_agents: usize, p: &ScenarioParams) -> Layout {
    let mut g = VoxelGrid::new(SIZE as usize, HEIGHT, SIZE as usize);
    g.fill(
        VoxelCoord::new(0, 0, 0),
        VoxelCoord::new(SIZE - 1, 0, SIZE - 1),
        CellKind::Solid(material::FLOOR),
    );
    layout::ring(&mut g, 0, 0, SIZE - 1, SIZE - 1, 1, WALL_TOP, material::WALL);

    let x0 = rng.range_inclusive(3, (SIZE - 3 - ZONE) as i64) as i32;
    let z0 = rng.range_inclusive(3, (SIZE - 3 - ZONE) as i64) as i32;
    let mut zone = Vec::new();
    for z in z0..z0 + ZONE {
        for x in x0..x0 + ZONE {
            let c = VoxelCoord::new(x, 1, z);
            g.set(c, CellKind::BuildZone);
            zone.push(c);
        }
    }

    let near_zone = |c: &VoxelCoord| c.x >= x0 - 1 && c.x <= x0 + ZONE && c.z >= z0 - 1 && c.z <= z0 + ZONE;
    let cells: Vec<VoxelCoord> = (1..SIZE - 1)
        .flat_map(|z| (1..SIZE - 1).map(move |x| VoxelCoord::new(x, 1, z)))
        .filter(|c| !near_zone(c))
        .collect();
    let chosen = layout::pick(rng, &cells, p.boxes as usize + SPAWN_POINTS);
    let (boxes, spawn_cells) = chosen.split_at(p.boxes as usize);
    let objects = boxes
        .iter()
        .enumerate()
        .map(|(i, &c)| DynamicObject::new(ObjectId(i as u32), ObjectKind::MovableBox, c))
        .collect();
    let spawns = spawn_cells
        .iter()
        .map(|&c| Spawn::in_cell(c, rng.below(4) as f64 * std::f64::consts::FRAC_PI_2))
        .collect();

    Layout {
        grid: g,
        objects,
        spawns,
        decorations: Vec::new(),
        data: ScenarioData::Tower(TowerData {
            zone,
            h_max: 0,
            carry_bonus_paid: vec![false; num_agents],
        }),
        rules: InteractionRules::default(),
    }
}

/// Tallest column of free blocks standing on the zone floor.
pub(crate) fn zone_height(world: &World, zone: &[VoxelCoord]) -> u32 {
    let occupied = |c: VoxelCoord| {
        world
            .objects
            .iter()
            .any(|o| o.is_free() && o.kind.is_block() && o.cell() == c)
    };
    zone.iter()
        .map(|&base| (0..).take_while(|&k| occupied(base.offset(0, k, 0))).count() as u32)
        .max()
        .unwrap_or(0)
}
