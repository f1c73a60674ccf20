//! Box-pushing puzzles built by pulling boxes off their targets.
//!
//! Starting from the solved state, a virtual player performs random reverse
//! moves (pulls). Every pull undoes a legal push, so the resulting start state
//! is solvable by construction.

use std::collections::VecDeque;

use crate::entity::{DynamicObject, ObjectId, ObjectKind};
use crate::grid::{CellKind, VoxelCoord, VoxelGrid};
use crate::material;
use crate::physics::InteractionRules;
use crate::rng::SeededRng;

use super::{layout, Layout, ScenarioData, ScenarioParams, SokobanData, Spawn};

/// Room side including walls.
pub const ROOM: i32 = 8;
const MIN_PULLS: i64 = 30;
const MAX_PULLS: i64 = 80;
const MAX_ATTEMPTS: usize = 20_000;
const DIRS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Abstract lattice state of a puzzle over `(x, z)` cells; the interior is
/// `1..=6` on both axes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SokobanPuzzle {
    pub targets: Vec<(i32, i32)>,
    pub boxes: Vec<(i32, i32)>,
    pub player: (i32, i32),
}

pub fn interior(c: (i32, i32)) -> bool {
    (1..ROOM - 1).contains(&c.0) && (1..ROOM - 1).contains(&c.1)
}

/// Cells the player reaches without moving any box.
fn player_region(player: (i32, i32), boxes: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let mut seen = vec![player];
    let mut queue = VecDeque::from([player]);
    while let Some(c) = queue.pop_front() {
        for (dx, dz) in DIRS {
            let n = (c.0 + dx, c.1 + dz);
            if interior(n) && !boxes.contains(&n) && !seen.contains(&n) {
                seen.push(n);
                queue.push_back(n);
            }
        }
    }
    seen
}

pub(crate) fn generate_puzzle(rng: &mut SeededRng, k: usize) -> SokobanPuzzle {
    let cells: Vec<(i32, i32)> = (1..ROOM - 1).flat_map(|z| (1..ROOM - 1).map(move |x| (x, z))).collect();
    loop {
        let targets = layout::pick(rng, &cells, k);
        let mut boxes = targets.clone();
        let free: Vec<(i32, i32)> = cells.iter().copied().filter(|c| !boxes.contains(c)).collect();
        let mut player = *rng.choose(&free).expect("free cell");
        let goal = rng.range_inclusive(MIN_PULLS, MAX_PULLS);
        let mut pulls = 0;
        for _ in 0..MAX_ATTEMPTS {
            let solved = boxes.iter().all(|b| targets.contains(b));
            if pulls >= goal && !solved {
                return SokobanPuzzle { targets, boxes, player };
            }
            let b = rng.below(boxes.len() as u64) as usize;
            let (dx, dz) = DIRS[rng.below(4) as usize];
            let from = boxes[b];
            let stand = (from.0 + dx, from.1 + dz);
            let back = (from.0 + 2 * dx, from.1 + 2 * dz);
            if !interior(stand) || !interior(back) || boxes.contains(&stand) || boxes.contains(&back) {
                continue;
            }
            if !player_region(player, &boxes).contains(&stand) {
                continue;
            }
            boxes[b] = stand;
            player = back;
            pulls += 1;
        }
    }
}

pub(crate) fn generate(rng: &mut SeededRng, num_agents: usize, p: &ScenarioParams) -> Layout {
    let puzzle = generate_puzzle(rng, p.boxes as usize);
    let mut g = VoxelGrid::new(ROOM as usize, 4, ROOM as usize);
    g.fill(
        VoxelCoord::new(0, 0, 0),
        VoxelCoord::new(ROOM - 1, 0, ROOM - 1),
        CellKind::Solid(material::FLOOR),
    );
    layout::ring(&mut g, 0, 0, ROOM - 1, ROOM - 1, 1, 2, material::WALL);
    let cell = |c: (i32, i32)| VoxelCoord::new(c.0, 1, c.1);
    for &t in &puzzle.targets {
        g.set(cell(t), CellKind::BoxTarget);
    }
    let objects = puzzle
        .boxes
        .iter()
        .enumerate()
        .map(|(k, &b)| DynamicObject::new(ObjectId(k as u32), ObjectKind::MovableBox, cell(b)))
        .collect();

    let yaw = rng.below(4) as f64 * std::f64::consts::FRAC_PI_2;
    let mut spawns = vec![Spawn::in_cell(cell(puzzle.player), yaw)];
    let mut others: Vec<(i32, i32)> = player_region(puzzle.player, &puzzle.boxes)
        .into_iter()
        .filter(|&c| c != puzzle.player)
        .collect();
    others.sort();
    let extra = (num_agents.max(2) - 1).min(others.len());
    for c in layout::pick(rng, &others, extra) {
        spawns.push(Spawn::in_cell(cell(c), yaw));
    }

    let on_target = puzzle.boxes.iter().filter(|b| puzzle.targets.contains(b)).count() as u32;
    Layout {
        grid: g,
        objects,
        spawns,
        decorations: Vec::new(),
        data: ScenarioData::Sokoban(SokobanData {
            targets: puzzle.targets.iter().map(|&t| cell(t)).collect(),
            on_target,
            puzzle,
        }),
        rules: InteractionRules {
            carry: false,
            push: true,
        },
    }
}
