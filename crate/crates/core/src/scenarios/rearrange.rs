//! Room with colored items to be carried onto their outlined target cells.

use crate::entity::{DynamicObject, ObjectId, ObjectKind};
use crate::grid::{CellKind, VoxelCoord, VoxelGrid};
use crate::material;
use crate::math::Aabb;
use crate::physics::InteractionRules;
use crate::render::SceneBox;
use crate::rng::SeededRng;

use super::{layout, Layout, RearrangeData, ScenarioData, ScenarioParams, Spawn};

const ROOM: i32 = 10;
const WALL_TOP: i32 = 2;
const FRAME_WIDTH: f64 = 0.08;
const FRAME_HEIGHT: f64 = 0.02;
const SPAWN_POINTS: usize = 8;

/// Four thin bars tracing the border of a floor cell.
fn outline(c: VoxelCoord, m: material::MaterialId) -> [SceneBox; 4] {
    let (x, y, z) = (c.x as f64, c.y as f64, c.z as f64);
    let bar = |x0: f64, z0: f64, x1: f64, z1: f64| SceneBox {
        aabb: Aabb::new(
            crate::math::Vec3::new(x0, y, z0),
            crate::math::Vec3::new(x1, y + FRAME_HEIGHT, z1),
        )
        .expect("positive extent"),
        material: m,
    };
    let w = FRAME_WIDTH;
    [
        bar(x, z, x + 1.0, z + w),
        bar(x, z + 1.0 - w, x + 1.0, z + 1.0),
        bar(x, z + w, x + w, z + 1.0 - w),
        bar(x + 1.0 - w, z + w, x + 1.0, z + 1.0 - w),
    ]
}

pub(crate) fn generate(rng: &mut SeededRng, _num_agents: usize, p: &ScenarioParams) -> Layout {
    let mut g = VoxelGrid::new(ROOM as usize, WALL_TOP as usize + 3, ROOM as usize);
    g.fill(
        VoxelCoord::new(0, 0, 0),
        VoxelCoord::new(ROOM - 1, 0, ROOM - 1),
        CellKind::Solid(material::FLOOR),
    );
    layout::ring(&mut g, 0, 0, ROOM - 1, ROOM - 1, 1, WALL_TOP, material::WALL);

    let cells: Vec<VoxelCoord> = (1..ROOM - 1)
        .flat_map(|z| (1..ROOM - 1).map(move |x| VoxelCoord::new(x, 1, z)))
        .collect();
    let k = p.items as usize;
    let chosen = layout::pick(rng, &cells, 2 * k + SPAWN_POINTS);
    let (starts, rest) = chosen.split_at(k);
    let (targets, spawn_cells) = rest.split_at(k);

    let mut objects = Vec::new();
    let mut decorations = Vec::new();
    for (i, (&s, &t)) in starts.iter().zip(targets).enumerate() {
        let kind = ObjectKind::RearrangeItem { item: i as u8 };
        objects.push(DynamicObject::new(ObjectId(i as u32), kind, s));
        decorations.extend(outline(t, kind.material()));
    }
    let spawns = spawn_cells
        .iter()
        .map(|&c| Spawn::in_cell(c, rng.below(4) as f64 * std::f64::consts::FRAC_PI_2))
        .collect();

    Layout {
        grid: g,
        objects,
        spawns,
        decorations,
        data: ScenarioData::Rearrangement(RearrangeData {
            targets: targets.to_vec(),
            correct: vec![false; k],
        }),
        rules: InteractionRules::default(),
    }
}
