//! Procedural level generators and reward logic for the eight scenarios.

mod collect;
mod hex;
mod layout;
mod obstacles;
mod rearrange;
mod sokoban;
mod tower;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use hex::{HexCoord, HexMaze};
pub use obstacles::{Obstacle, Section};
pub use sokoban::SokobanPuzzle;

use crate::action::Action;
use crate::entity::{AgentState, DynamicObject, ObjectKind, Pose};
use crate::error::{Result, SimError};
use crate::grid::{TriggerKind, VoxelCoord, VoxelGrid};
use crate::material::{self, MaterialId};
use crate::math::Vec3;
use crate::meshing::{greedy_merge_with, MergePolicy, StaticGeometry};
use crate::physics::{step_environment, InteractionRules, PhysicsParams, StepEvents, World};
use crate::render::{overlay_hud, Camera, Observation, Renderer, SceneBox, StaticScene};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioKind {
    ObstaclesEasy,
    ObstaclesHard,
    Collect,
    Sokoban,
    HexExplore,
    HexMemory,
    Rearrangement,
    TowerBuilding,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::ObstaclesEasy,
        ScenarioKind::ObstaclesHard,
        ScenarioKind::Collect,
        ScenarioKind::Sokoban,
        ScenarioKind::HexExplore,
        ScenarioKind::HexMemory,
        ScenarioKind::Rearrangement,
        ScenarioKind::TowerBuilding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::ObstaclesEasy => "ObstaclesEasy",
            ScenarioKind::ObstaclesHard => "ObstaclesHard",
            ScenarioKind::Collect => "Collect",
            ScenarioKind::Sokoban => "Sokoban",
            ScenarioKind::HexExplore => "HexExplore",
            ScenarioKind::HexMemory => "HexMemory",
            ScenarioKind::Rearrangement => "Rearrangement",
            ScenarioKind::TowerBuilding => "TowerBuilding",
        }
    }

    pub fn is_hex(self) -> bool {
        matches!(self, ScenarioKind::HexExplore | ScenarioKind::HexMemory)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = SimError;

    /// Accepts `ObstaclesEasy`, `obstacles_easy`, `obstacleseasy`, and so on.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name().to_lowercase() == norm)
            .ok_or_else(|| SimError::InvalidConfig(format!("unknown scenario `{s}`")))
    }
}

/// Tunable generation knobs. Fields a kind does not use are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioParams {
    /// Steps before timeout.
    pub episode_length: u32,
    /// Obstacle sections (each followed by a room).
    pub rooms: u32,
    /// Green diamonds (Obstacles), or diamonds of each color (Collect).
    pub diamonds: u32,
    /// Sokoban boxes and targets, or TowerBuilding boxes.
    pub boxes: u32,
    pub maze_radius: u32,
    /// Rearrangement items, or HexMemory matching collectibles (an equal
    /// number of non-matching ones is added).
    pub items: u32,
}

impl ScenarioParams {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let base = ScenarioParams {
            episode_length: 512,
            rooms: 0,
            diamonds: 0,
            boxes: 0,
            maze_radius: 0,
            items: 0,
        };
        match kind {
            ScenarioKind::ObstaclesEasy => ScenarioParams { rooms: 2, diamonds: 3, ..base },
            ScenarioKind::ObstaclesHard => ScenarioParams {
                episode_length: 1024,
                rooms: 4,
                diamonds: 5,
                ..base
            },
            ScenarioKind::Collect => ScenarioParams { diamonds: 5, ..base },
            ScenarioKind::Sokoban => ScenarioParams { boxes: 4, ..base },
            ScenarioKind::HexExplore => ScenarioParams {
                episode_length: 1024,
                maze_radius: 7,
                ..base
            },
            ScenarioKind::HexMemory => ScenarioParams {
                episode_length: 1024,
                maze_radius: 5,
                items: 3,
                ..base
            },
            ScenarioKind::Rearrangement => ScenarioParams {
                episode_length: 1024,
                items: 4,
                ..base
            },
            ScenarioKind::TowerBuilding => ScenarioParams {
                episode_length: 1536,
                boxes: 12,
                ..base
            },
        }
    }

    pub fn with_overrides(mut self, kind: ScenarioKind, o: &ScenarioOverrides) -> Result<Self> {
        if let Some(v) = o.episode_length {
            self.episode_length = v;
        }
        if let Some(v) = o.rooms {
            self.rooms = v;
        }
        if let Some(v) = o.diamonds {
            self.diamonds = v;
        }
        if let Some(v) = o.boxes {
            self.boxes = v;
        }
        if let Some(v) = o.maze_radius {
            self.maze_radius = v;
        }
        if let Some(v) = o.items {
            self.items = v;
        }
        self.validate(kind)?;
        Ok(self)
    }

    pub fn validate(&self, kind: ScenarioKind) -> Result<()> {
        let check = |name: &str, v: u32, lo: u32, hi: u32| {
            if v < lo || v > hi {
                Err(SimError::InvalidConfig(format!(
                    "{kind}: {name} = {v} outside [{lo}, {hi}]"
                )))
            } else {
                Ok(())
            }
        };
        check("episode_length", self.episode_length, 1, 1_000_000)?;
        match kind {
            ScenarioKind::ObstaclesEasy | ScenarioKind::ObstaclesHard => {
                check("rooms", self.rooms, 1, 8)?;
                check("diamonds", self.diamonds, 0, 3 * self.rooms)
            }
            ScenarioKind::Collect => check("diamonds", self.diamonds, 1, 20),
            ScenarioKind::Sokoban => check("boxes", self.boxes, 1, 6),
            ScenarioKind::HexExplore => check("maze_radius", self.maze_radius, 2, 10),
            ScenarioKind::HexMemory => {
                check("maze_radius", self.maze_radius, 2, 10)?;
                check("items", self.items, 1, 6)
            }
            ScenarioKind::Rearrangement => check("items", self.items, 1, 8),
            ScenarioKind::TowerBuilding => check("boxes", self.boxes, 1, 40),
        }
    }
}

/// One section of an override file; every key is optional.
///
/// ```toml
/// [obstacles_hard]
/// episode_length = 2048
/// rooms = 3
///
/// [tower_building]
/// boxes = 20
/// ```
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    pub episode_length: Option<u32>,
    pub rooms: Option<u32>,
    pub diamonds: Option<u32>,
    pub boxes: Option<u32>,
    pub maze_radius: Option<u32>,
    pub items: Option<u32>,
}

/// Parses an override file into per-kind sections. Section names accept the
/// same spellings as [`ScenarioKind::from_str`].
pub fn parse_overrides(text: &str) -> Result<BTreeMap<ScenarioKind, ScenarioOverrides>> {
    let raw: BTreeMap<String, ScenarioOverrides> =
        toml::from_str(text).map_err(|e| SimError::InvalidConfig(format!("override file: {e}")))?;
    let mut out = BTreeMap::new();
    for (name, section) in raw {
        let kind: ScenarioKind = name.parse()?;
        ScenarioParams::defaults(kind).with_overrides(kind, &section)?;
        out.insert(kind, section);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spawn {
    pub position: Vec3,
    pub yaw: f64,
}

impl Spawn {
    /// Standing in the empty cell `c`, feet on its floor.
    pub fn in_cell(c: VoxelCoord, yaw: f64) -> Self {
        Spawn {
            position: Vec3::new(c.x as f64 + 0.5, c.y as f64, c.z as f64 + 0.5),
            yaw,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstaclesData {
    pub reached: Vec<bool>,
    pub course: Vec<Section>,
    /// First exit-pad row.
    pub exit_z: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollectData {
    pub greens_left: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SokobanData {
    pub targets: Vec<VoxelCoord>,
    pub on_target: u32,
    /// Start state on the `(x, z)` lattice.
    pub puzzle: SokobanPuzzle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HexExploreData {
    pub maze: HexMaze,
    pub found: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HexMemoryData {
    pub maze: HexMaze,
    /// `(shape, color)` of the displayed exemplar.
    pub exemplar: (u8, u8),
    pub matching_left: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RearrangeData {
    /// Target cell per item id.
    pub targets: Vec<VoxelCoord>,
    pub correct: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerData {
    /// Ground-level cells of the build zone.
    pub zone: Vec<VoxelCoord>,
    pub h_max: u32,
    /// Per agent: the zone-entry bonus was already paid for the current carry.
    pub carry_bonus_paid: Vec<bool>,
}

/// Per-kind episode bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioData {
    Obstacles(ObstaclesData),
    Collect(CollectData),
    Sokoban(SokobanData),
    HexExplore(HexExploreData),
    HexMemory(HexMemoryData),
    Rearrangement(RearrangeData),
    Tower(TowerData),
}

/// What a generator hands back before geometry is merged.
pub(crate) struct Layout {
    pub grid: VoxelGrid,
    pub objects: Vec<DynamicObject>,
    pub spawns: Vec<Spawn>,
    pub decorations: Vec<SceneBox>,
    pub data: ScenarioData,
    pub rules: InteractionRules,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub rewards: Vec<f64>,
    pub done: bool,
    /// Final when `done`; the running value otherwise.
    pub true_objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeState {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub params: ScenarioParams,
    pub grid: VoxelGrid,
    pub geom: StaticGeometry,
    pub scene: StaticScene,
    pub world: World,
    pub data: ScenarioData,
    pub spawns: Vec<Spawn>,
    pub rules: InteractionRules,
    pub step_count: u32,
    pub episode_length: u32,
    pub done: bool,
    pub rng: SeededRng,
}

fn merge_policy(m: MaterialId) -> MergePolicy {
    if m == material::HEX_WALL {
        MergePolicy::Column
    } else {
        MergePolicy::Greedy
    }
}

/// Builds a fresh episode; a pure function of its arguments.
pub fn generate(kind: ScenarioKind, seed: u64, num_agents: usize, params: &ScenarioParams) -> Result<EpisodeState> {
    if num_agents == 0 || num_agents > 8 {
        return Err(SimError::InvalidConfig(format!("agents per env must be in 1..=8, got {num_agents}")));
    }
    params.validate(kind)?;
    let mut rng = SeededRng::new(seed);
    let layout = match kind {
        ScenarioKind::ObstaclesEasy => obstacles::generate(&mut rng, num_agents, params, false),
        ScenarioKind::ObstaclesHard => obstacles::generate(&mut rng, num_agents, params, true),
        ScenarioKind::Collect => collect::generate(&mut rng, num_agents, params),
        ScenarioKind::Sokoban => sokoban::generate(&mut rng, num_agents, params),
        ScenarioKind::HexExplore => hex::generate_explore(&mut rng, num_agents, params),
        ScenarioKind::HexMemory => hex::generate_memory(&mut rng, num_agents, params),
        ScenarioKind::Rearrangement => rearrange::generate(&mut rng, num_agents, params),
        ScenarioKind::TowerBuilding => tower::generate(&mut rng, num_agents, params),
    };
    debug_assert!(layout.spawns.len() >= num_agents);
    let geom = greedy_merge_with(&layout.grid, merge_policy);
    let scene = StaticScene::new(&geom, &layout.decorations);
    let agents = (0..num_agents)
        .map(|i| {
            let s = layout.spawns[i % layout.spawns.len()];
            AgentState::new(Pose::new(s.position, s.yaw))
        })
        .collect();
    Ok(EpisodeState {
        kind,
        seed,
        params: *params,
        grid: layout.grid,
        geom,
        scene,
        world: World {
            agents,
            objects: layout.objects,
        },
        data: layout.data,
        spawns: layout.spawns,
        rules: layout.rules,
        step_count: 0,
        episode_length: params.episode_length,
        done: false,
        rng,
    })
}

impl EpisodeState {
    pub fn num_agents(&self) -> usize {
        self.world.agents.len()
    }

    /// One physics step followed by scoring.
    pub fn step(&mut self, actions: &[Action], physics: &PhysicsParams) -> Result<StepOutcome> {
        if self.done {
            return Err(SimError::EpisodeOver);
        }
        let events = step_environment(&mut self.world, actions, &self.geom, physics, &self.rules)?;
        Ok(score_step(self, &events))
    }

    pub fn timeout_fraction(&self) -> f64 {
        timeout_fraction(self.step_count, self.episode_length)
    }

    /// The running true objective.
    pub fn true_objective(&self) -> f64 {
        match &self.data {
            ScenarioData::Obstacles(d) => flag(d.reached.iter().all(|&r| r)),
            ScenarioData::Collect(d) => flag(d.greens_left == 0),
            ScenarioData::Sokoban(d) => flag(d.on_target as usize == d.targets.len()),
            ScenarioData::HexExplore(d) => flag(d.found),
            ScenarioData::HexMemory(d) => flag(d.matching_left == 0),
            ScenarioData::Rearrangement(d) => flag(d.correct.iter().all(|&c| c)),
            ScenarioData::Tower(d) => d.h_max as f64,
        }
    }

    /// Egocentric view of `agent` with the time bar.
    pub fn render(&self, agent: usize, renderer: &mut Renderer, out: &mut Observation) {
        let cam = Camera::from_pose(&self.world.agents[agent].pose);
        renderer.render_view(&self.scene, &self.world, Some(agent), &cam, out);
        overlay_hud(out, self.timeout_fraction());
    }

    /// Moves an agent back to the first spawn point not blocked by another
    /// agent or block. Anything carried comes along.
    pub fn respawn(&mut self, agent: usize) {
        let n = self.spawns.len();
        let mut chosen = self.spawns[agent % n];
        for k in 0..n {
            let s = self.spawns[(agent + k) % n];
            let body = AgentState::new(Pose::new(s.position, s.yaw)).aabb();
            let blocked = self
                .world
                .agents
                .iter()
                .enumerate()
                .any(|(j, a)| j != agent && a.aabb().overlaps(&body))
                || self
                    .world
                    .objects
                    .iter()
                    .any(|o| o.is_free() && o.kind.is_block() && o.aabb.overlaps(&body));
            if !blocked {
                chosen = s;
                break;
            }
        }
        let a = &mut self.world.agents[agent];
        a.pose = Pose::new(chosen.position, chosen.yaw);
        a.vertical_velocity = 0.0;
        a.grounded = true;
        a.touching = 0;
        crate::physics::attach_carried(&mut self.world, agent);
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Remaining share of the episode, `(length - step) / length`.
pub fn timeout_fraction(step_count: u32, episode_length: u32) -> f64 {
    let left = episode_length.saturating_sub(step_count);
    left as f64 / episode_length as f64
}

pub const REACHED_EXIT: f64 = 1.0;
pub const OBSTACLE_DIAMOND: f64 = 0.5;
pub const ALL_REACHED_EXIT: f64 = 5.0;
pub const GREEN_DIAMOND: f64 = 1.0;
pub const RED_DIAMOND: f64 = -1.0;
pub const ALL_GREEN: f64 = 5.0;
pub const FELL_INTO_VOID: f64 = -0.5;
pub const BOX_ON_TARGET: f64 = 1.0;
pub const BOX_OFF_TARGET: f64 = -1.0;
pub const ALL_BOXES_ON_TARGETS: f64 = 10.0;
pub const PINK_DIAMOND: f64 = 5.0;
pub const MATCHING_OBJECT: f64 = 1.0;
pub const NON_MATCHING_OBJECT: f64 = -1.0;
pub const ITEM_PLACED: f64 = 1.0;
pub const ITEM_REMOVED: f64 = -1.0;
pub const ALL_ITEMS_PLACED: f64 = 10.0;
pub const ZONE_ENTRY_WITH_OBJECT: f64 = 0.1;

/// Reward for placing a block at stack height `h` inside the build zone.
pub fn tower_placement_reward(h: u32) -> f64 {
    0.05 * (h as f64 + 2f64.powi(h as i32))
}

/// Applies one step's events: dense rewards, respawns, success and timeout.
pub fn score_step(state: &mut EpisodeState, events: &StepEvents) -> StepOutcome {
    let n = state.world.agents.len();
    let mut rewards = vec![0.0; n];
    let mut success = false;
    let mut respawn = vec![false; n];
    for (i, ev) in events.agents.iter().enumerate() {
        if ev.fell_into_void || ev.entered(TriggerKind::Lava) {
            respawn[i] = true;
        }
    }

    match &mut state.data {
        ScenarioData::Obstacles(d) => {
            for (i, ev) in events.agents.iter().enumerate() {
                for (_, kind) in &ev.collected {
                    if *kind == ObjectKind::GreenDiamond {
                        rewards[i] += OBSTACLE_DIAMOND;
                    }
                }
                if ev.reached_exit && !d.reached[i] {
                    d.reached[i] = true;
                    rewards[i] += REACHED_EXIT;
                }
            }
            if d.reached.iter().all(|&r| r) {
                rewards.iter_mut().for_each(|r| *r += ALL_REACHED_EXIT);
                success = true;
            }
        }
        ScenarioData::Collect(d) => {
            for (i, ev) in events.agents.iter().enumerate() {
                for (_, kind) in &ev.collected {
                    match kind {
                        ObjectKind::GreenDiamond => {
                            rewards[i] += GREEN_DIAMOND;
                            d.greens_left = d.greens_left.saturating_sub(1);
                        }
                        ObjectKind::RedDiamond => rewards[i] += RED_DIAMOND,
                        _ => {}
                    }
                }
                if ev.fell_into_void {
                    rewards[i] += FELL_INTO_VOID;
                }
            }
            if d.greens_left == 0 {
                rewards.iter_mut().for_each(|r| *r += ALL_GREEN);
                success = true;
            }
        }
        ScenarioData::Sokoban(d) => {
            for (i, ev) in events.agents.iter().enumerate() {
                for p in &ev.pushed {
                    let was = d.targets.contains(&p.from);
                    let now = d.targets.contains(&p.to);
                    if was && !now {
                        rewards[i] += BOX_OFF_TARGET;
                        d.on_target -= 1;
                    } else if now && !was {
                        rewards[i] += BOX_ON_TARGET;
                        d.on_target += 1;
                    }
                }
            }
            if d.on_target as usize == d.targets.len() {
                rewards.iter_mut().for_each(|r| *r += ALL_BOXES_ON_TARGETS);
                success = true;
            }
        }
        ScenarioData::HexExplore(d) => {
            for (i, ev) in events.agents.iter().enumerate() {
                if ev.collected.iter().any(|(_, k)| *k == ObjectKind::PinkDiamond) {
                    rewards[i] += PINK_DIAMOND;
                    d.found = true;
                }
            }
            success = d.found;
        }
        ScenarioData::HexMemory(d) => {
            for (i, ev) in events.agents.iter().enumerate() {
                for (_, kind) in &ev.collected {
                    if let ObjectKind::CollectibleShape { shape, color } = *kind {
                        if (shape, color) == d.exemplar {
                            rewards[i] += MATCHING_OBJECT;
                            d.matching_left = d.matching_left.saturating_sub(1);
                        } else {
                            rewards[i] += NON_MATCHING_OBJECT;
                        }
                    }
                }
            }
            success = d.matching_left == 0;
        }
        ScenarioData::Rearrangement(d) => {
            for (i, ev) in events.agents.iter().enumerate() {
                if let Some(id) = ev.picked_up {
                    if let Some(item) = item_of(&state.world, id) {
                        if d.correct[item] {
                            d.correct[item] = false;
                            rewards[i] += ITEM_REMOVED;
                        }
                    }
                }
                if let Some(p) = &ev.placed {
                    if let Some(item) = item_of(&state.world, p.object) {
                        if d.targets[item] == p.cell && !d.correct[item] {
                            d.correct[item] = true;
                            rewards[i] += ITEM_PLACED;
                        }
                    }
                }
            }
            if d.correct.iter().all(|&c| c) {
                rewards.iter_mut().for_each(|r| *r += ALL_ITEMS_PLACED);
                success = true;
            }
        }
        ScenarioData::Tower(d) => {
            for (i, ev) in events.agents.iter().enumerate() {
                if ev.picked_up.is_some() {
                    d.carry_bonus_paid[i] = false;
                }
                let carrying = state.world.agents[i].carrying.is_some() || ev.placed.is_some();
                if ev.entered(TriggerKind::BuildZone) && carrying && !d.carry_bonus_paid[i] {
                    d.carry_bonus_paid[i] = true;
                    rewards[i] += ZONE_ENTRY_WITH_OBJECT;
                }
                if let Some(p) = &ev.placed {
                    if d.zone.iter().any(|z| z.x == p.cell.x && z.z == p.cell.z && p.cell.y >= z.y) {
                        rewards[i] += tower_placement_reward(p.height);
                    }
                }
            }
            d.h_max = d.h_max.max(tower::zone_height(&state.world, &d.zone));
        }
    }

    for (i, r) in respawn.into_iter().enumerate() {
        if r {
            state.respawn(i);
        }
    }

    state.step_count += 1;
    let timed_out = state.step_count >= state.episode_length;
    let success = success && state.kind != ScenarioKind::TowerBuilding;
    let done = success || timed_out;
    state.done = done;
    StepOutcome {
        rewards,
        done,
        true_objective: state.true_objective(),
    }
}

fn item_of(world: &World, id: crate::entity::ObjectId) -> Option<usize> {
    match world.object(id)?.kind {
        ObjectKind::RearrangeItem { item } => Some(item as usize),
        _ => None,
    }
}
