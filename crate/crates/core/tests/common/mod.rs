//! Shared oracles and scripted controllers for the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use voxbatch::action::{Action, Gaze, Interact, Jump, Move, Strafe};
use voxbatch::error::Result;
use voxbatch::math::Vec3;
use voxbatch::physics::PhysicsParams;
use voxbatch::scenarios::{EpisodeState, Obstacle, ScenarioData, SokobanPuzzle, StepOutcome};

pub type Cell = (i32, i32);

pub const DIRS: [Cell; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

fn inside(c: Cell) -> bool {
    (1..=6).contains(&c.0) && (1..=6).contains(&c.1)
}

fn add(a: Cell, b: Cell) -> Cell {
    (a.0 + b.0, a.1 + b.1)
}

/// One push: the box at `from` moves one cell along `dir`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PushMove {
    pub from: Cell,
    pub dir: Cell,
}

const SIDE: i32 = 6;
const FULL: u64 = (1 << 36) - 1;
/// Columns where a shift toward -x / +x would wrap.
const NOT_LEFT_EDGE: u64 = FULL & !0x041_041_041; // x = 1 removed
const NOT_RIGHT_EDGE: u64 = FULL & !(0x041_041_041 << 5); // x = 6 removed

fn bit(c: Cell) -> u64 {
    1 << ((c.1 - 1) * SIDE + (c.0 - 1))
}

fn cell_of(i: u32) -> Cell {
    (i as i32 % SIDE + 1, i as i32 / SIDE + 1)
}

/// Flood fill over free interior cells as a bitboard.
fn region_bits(player: u64, boxes: u64) -> u64 {
    let free = FULL & !boxes;
    let mut r = player;
    loop {
        let grown = r
            | ((r & NOT_RIGHT_EDGE) << 1)
            | ((r & NOT_LEFT_EDGE) >> 1)
            | (r << SIDE)
            | (r >> SIDE);
        let next = grown & free;
        if next == r {
            return r;
        }
        r = next;
    }
}

/// Breadth-first search over push moves; returns a push-optimal solution.
pub fn solve_sokoban(p: &SokobanPuzzle) -> Option<Vec<PushMove>> {
    type State = (u32, u64);
    let targets: u64 = p.targets.iter().map(|&t| bit(t)).sum();
    let key = |player: u64, boxes: u64| -> State { (region_bits(player, boxes).trailing_zeros(), boxes) };
    let start_boxes: u64 = p.boxes.iter().map(|&b| bit(b)).sum();
    let start = key(bit(p.player), start_boxes);
    let mut parent: HashMap<State, Option<(State, PushMove)>> = HashMap::from([(start, None)]);
    let mut q = VecDeque::from([start]);
    while let Some(s) = q.pop_front() {
        if s.1 == targets {
            let mut moves = Vec::new();
            let mut cur = s;
            while let Some(Some((prev, m))) = parent.get(&cur).copied() {
                moves.push(m);
                cur = prev;
            }
            moves.reverse();
            return Some(moves);
        }
        let reach = region_bits(1 << s.0, s.1);
        let mut rest = s.1;
        while rest != 0 {
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            let b = cell_of(i);
            for d in DIRS {
                let stand = (b.0 - d.0, b.1 - d.1);
                let to = add(b, d);
                if !inside(stand) || !inside(to) || reach & bit(stand) == 0 || s.1 & bit(to) != 0 {
                    continue;
                }
                let nb = s.1 & !bit(b) | bit(to);
                let ns = key(bit(b), nb);
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(ns) {
                    e.insert(Some((s, PushMove { from: b, dir: d })));
                    q.push_back(ns);
                }
            }
        }
    }
    None
}

/// Steps an episode with scripted actions, keeping the history.
pub struct Driver<'a> {
    pub state: &'a mut EpisodeState,
    pub physics: PhysicsParams,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub last: Option<StepOutcome>,
}

impl<'a> Driver<'a> {
    pub fn new(state: &'a mut EpisodeState) -> Self {
        Self {
            state,
            physics: PhysicsParams::default(),
            actions: Vec::new(),
            rewards: Vec::new(),
            last: None,
        }
    }

    pub fn done(&self) -> bool {
        self.state.done
    }

    pub fn act(&mut self, a: Action) -> Result<&StepOutcome> {
        let out = self.state.step(&[a], &self.physics)?;
        self.actions.push(a);
        self.rewards.push(out.rewards[0]);
        self.last = Some(out);
        Ok(self.last.as_ref().unwrap())
    }

    pub fn position(&self) -> Vec3 {
        self.state.world.agents[0].pose.position
    }

    pub fn cell(&self) -> Cell {
        let p = self.position();
        (p.x.floor() as i32, p.z.floor() as i32)
    }

    /// The movement or strafe action that best follows world direction `d`.
    pub fn walk(&self, d: Cell) -> Action {
        let pose = &self.state.world.agents[0].pose;
        let want = Vec3::new(d.0 as f64, 0.0, d.1 as f64);
        let f = pose.forward_flat().dot(want);
        let r = pose.right_flat().dot(want);
        let mut a = Action::NOOP;
        if f.abs() >= r.abs() {
            a.movement = if f > 0.0 { Move::Forward } else { Move::Backward };
        } else {
            a.strafe = if r > 0.0 { Strafe::Right } else { Strafe::Left };
        }
        a
    }

    fn step_len(&self) -> f64 {
        self.physics.move_speed * self.physics.dt
    }

    /// Moves along x then z until within half a step of the cell center.
    pub fn center_on(&mut self, c: Cell) -> Result<()> {
        let half = self.step_len() / 2.0 + 1e-9;
        for _ in 0..40 {
            let p = self.position();
            let ex = c.0 as f64 + 0.5 - p.x;
            let ez = c.1 as f64 + 0.5 - p.z;
            let a = if ex.abs() > half {
                self.walk((ex.signum() as i32, 0))
            } else if ez.abs() > half {
                self.walk((0, ez.signum() as i32))
            } else {
                return Ok(());
            };
            self.act(a)?;
            if self.done() {
                return Ok(());
            }
        }
        panic!("could not center on {c:?} from {:?}", self.position());
    }

    /// Follows 4-connected lattice `path` cell by cell, aligning the
    /// perpendicular axis before each move.
    pub fn follow(&mut self, path: &[Cell]) -> Result<()> {
        for &c in path {
            self.center_on(c)?;
            if self.done() {
                break;
            }
        }
        Ok(())
    }
}

/// Shortest 4-connected path from `from` to `to` over cells satisfying `free`,
/// excluding `from`.
pub fn lattice_path(from: Cell, to: Cell, free: impl Fn(Cell) -> bool) -> Option<Vec<Cell>> {
    let mut prev = HashMap::from([(from, from)]);
    let mut q = VecDeque::from([from]);
    while let Some(c) = q.pop_front() {
        if c == to {
            let mut path = vec![c];
            let mut cur = c;
            while prev[&cur] != cur {
                cur = prev[&cur];
                path.push(cur);
            }
            path.pop();
            path.reverse();
            return Some(path);
        }
        for d in DIRS {
            let n = add(c, d);
            if free(n) && !prev.contains_key(&n) {
                prev.insert(n, c);
                q.push_back(n);
            }
        }
    }
    None
}

/// Box cells on the `(x, z)` lattice, in object order.
pub fn box_cells(state: &EpisodeState) -> Vec<Cell> {
    state
        .world
        .objects
        .iter()
        .map(|o| {
            let c = o.cell();
            (c.x, c.z)
        })
        .collect()
}

/// Executes a push plan in the physical world. Returns once every push has
/// been applied or the episode ended.
pub fn execute_sokoban(driver: &mut Driver<'_>, plan: &[PushMove]) -> Result<()> {
    for m in plan {
        let boxes = box_cells(driver.state);
        let k = boxes.iter().position(|&b| b == m.from).expect("plan box present");
        let stand = (m.from.0 - m.dir.0, m.from.1 - m.dir.1);
        let path = lattice_path(driver.cell(), stand, |c| inside(c) && !boxes.contains(&c))
            .unwrap_or_else(|| panic!("no path from {:?} to {stand:?}", driver.cell()));
        driver.follow(&path)?;
        driver.center_on(stand)?;
        let mut pushed = false;
        for _ in 0..10 {
            driver.act(driver.walk(m.dir))?;
            if box_cells(driver.state)[k] != m.from {
                pushed = true;
                break;
            }
        }
        assert!(pushed, "push of {:?} along {:?} did not happen", m.from, m.dir);
        assert_eq!(box_cells(driver.state)[k], add(m.from, m.dir));
        if driver.done() {
            break;
        }
    }
    Ok(())
}

const FORWARD_JUMP: Action = Action {
    movement: Move::Forward,
    jump: Jump::Jump,
    ..Action::NOOP
};

impl Driver<'_> {
    pub fn forward(&mut self) -> Result<f64> {
        let before = self.position().z;
        self.act(Action::forward())?;
        Ok(self.position().z - before)
    }

    /// Walks along +z until a step makes no progress.
    pub fn forward_until_blocked(&mut self) -> Result<()> {
        for _ in 0..60 {
            if self.forward()? < 1e-9 || self.done() {
                return Ok(());
            }
        }
        panic!("never blocked near z = {}", self.position().z);
    }

    pub fn forward_until(&mut self, z: f64) -> Result<()> {
        while self.position().z < z && !self.done() {
            let moved = self.forward()?;
            assert!(moved > 0.0, "blocked at z = {} before reaching {z}", self.position().z);
        }
        Ok(())
    }

    pub fn gaze(&mut self, dir: Gaze, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.act(Action { gaze: dir, ..Action::NOOP })?;
        }
        Ok(())
    }

    /// Jumps with forward held and keeps going until grounded again.
    pub fn leap(&mut self) -> Result<()> {
        self.act(FORWARD_JUMP)?;
        for _ in 0..40 {
            if self.state.world.agents[0].grounded || self.done() {
                return Ok(());
            }
            self.act(Action::forward())?;
        }
        panic!("still airborne at {:?}", self.position());
    }

    pub fn interact(&mut self) -> Result<()> {
        self.act(Action {
            interact: Interact::Interact,
            ..Action::NOOP
        })?;
        Ok(())
    }

    /// Carries the box two rows before the obstacle at `z` into the row
    /// directly before it, then climbs onto the box.
    pub fn bridge_with_box(&mut self, z: i32) -> Result<()> {
        self.forward_until_blocked()?;
        let expect = z as f64 - 2.3;
        assert!((self.position().z - expect).abs() < 1e-6, "not touching the box: {:?}", self.position());
        self.gaze(Gaze::Down, 15)?;
        self.interact()?;
        assert!(self.state.world.agents[0].carrying.is_some(), "pickup failed at {:?}", self.position());
        for _ in 0..3 {
            self.forward()?;
        }
        self.interact()?;
        assert!(self.state.world.agents[0].carrying.is_none(), "placement failed at {:?}", self.position());
        self.gaze(Gaze::Up, 15)?;
        self.forward_until_blocked()?;
        self.leap()
    }
}

/// Scripted single-agent traversal of an obstacle course; returns once the
/// episode ends.
pub fn run_obstacle_expert(driver: &mut Driver<'_>) -> Result<()> {
    let ScenarioData::Obstacles(d) = &driver.state.data else {
        panic!("not an obstacle course")
    };
    let course = d.course.clone();
    driver.center_on((3, driver.cell().1))?;
    for s in course {
        let z = s.z as f64;
        match s.obstacle {
            Obstacle::LavaPit { .. } => {
                driver.forward_until(z - 0.6)?;
                driver.leap()?;
            }
            Obstacle::StepWall => {
                driver.forward_until_blocked()?;
                driver.leap()?;
            }
            Obstacle::StackWall => {
                driver.bridge_with_box(s.z)?;
                driver.forward_until_blocked()?;
                driver.leap()?;
            }
            Obstacle::RaisedGap => {
                driver.bridge_with_box(s.z)?;
                driver.forward_until(z - 0.2)?;
                driver.leap()?;
            }
        }
        if driver.done() {
            return Ok(());
        }
    }
    for _ in 0..200 {
        if driver.done() {
            break;
        }
        driver.act(Action::forward())?;
    }
    Ok(())
}

/// Penetration depth below which touching faces are not reported.
pub const PENETRATION_EPS: f64 = 1e-6;

/// Describes every pair of solid bodies that overlap by more than
/// [`PENETRATION_EPS`]. Carried blocks and small pickups are not solid.
pub fn interpenetrations(state: &EpisodeState) -> Vec<String> {
    let mut found = Vec::new();
    let statics: Vec<_> = state.geom.boxes().iter().map(|b| b.aabb).collect();
    let blocks: Vec<_> = state
        .world
        .objects
        .iter()
        .filter(|o| o.is_free() && o.kind.is_block())
        .collect();
    let agents: Vec<_> = state.world.agents.iter().map(|a| a.aabb()).collect();
    for (i, a) in agents.iter().enumerate() {
        for s in &statics {
            if a.overlaps_by(s, PENETRATION_EPS) {
                found.push(format!("agent {i} inside static {s:?}"));
            }
        }
        for b in &blocks {
            if a.overlaps_by(&b.aabb, PENETRATION_EPS) {
                found.push(format!("agent {i} inside block {:?}", b.id));
            }
        }
        for (j, other) in agents.iter().enumerate().skip(i + 1) {
            if a.overlaps_by(other, PENETRATION_EPS) {
                found.push(format!("agents {i} and {j} overlap"));
            }
        }
    }
    for (k, b) in blocks.iter().enumerate() {
        for s in &statics {
            if b.aabb.overlaps_by(s, PENETRATION_EPS) {
                found.push(format!("block {:?} inside static {s:?}", b.id));
            }
        }
        for other in blocks.iter().skip(k + 1) {
            if b.aabb.overlaps_by(&other.aabb, PENETRATION_EPS) {
                found.push(format!("blocks {:?} and {:?} overlap", b.id, other.id));
            }
        }
    }
    found
}

/// Steps `state` with uniformly random actions, checking for interpenetration
/// after every step. Finished episodes are regenerated with the next seed.
/// Returns the first violation, if any.
pub fn random_play(state: &mut EpisodeState, steps: usize, rng_seed: u64) -> Result<Option<String>> {
    use voxbatch::action::{unflatten_action, NUM_ACTIONS};
    use voxbatch::rng::SeededRng;
    use voxbatch::scenarios::generate;

    let physics = PhysicsParams::default();
    let mut rng = SeededRng::new(rng_seed);
    let n = state.num_agents();
    for t in 0..steps {
        let actions: Vec<Action> = (0..n)
            .map(|_| unflatten_action(rng.below(NUM_ACTIONS as u64) as u16))
            .collect::<Result<_>>()?;
        let out = state.step(&actions, &physics)?;
        if let Some(v) = interpenetrations(state).into_iter().next() {
            return Ok(Some(format!("{} seed {} step {t}: {v}", state.kind, state.seed)));
        }
        if out.done {
            *state = generate(state.kind, state.seed + 1, n, &state.params)?;
        }
    }
    Ok(None)
}

/// Where one block sits relative to another and what an agent managed to lift.
#[derive(Clone, Debug)]
pub struct StackCase {
    /// Cell offset of the second block from the first.
    pub offset: (i32, i32, i32),
    /// The second block rests on top of the first.
    pub loaded: bool,
    pub first_picked: bool,
    pub second_picked: bool,
}

/// Tries to lift each of two blocks from four sides at two pitches, for every
/// placement of the second block in the 3x2x3 neighbourhood above and beside
/// the first. Off-floor placements stand on a static pillar.
pub fn stacking_cases() -> Vec<StackCase> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    use voxbatch::entity::{AgentState, DynamicObject, ObjectId, ObjectKind, Pose};
    use voxbatch::grid::{CellKind, VoxelCoord, VoxelGrid};
    use voxbatch::material;
    use voxbatch::meshing::greedy_merge;
    use voxbatch::physics::{interact, AgentEvents, InteractionRules, World};

    let physics = PhysicsParams::default();
    let rules = InteractionRules::default();
    let first = VoxelCoord::new(6, 1, 6);
    let mut cases = Vec::new();
    for dy in 0..=1 {
        for dx in -1..=1 {
            for dz in -1..=1 {
                if (dx, dy, dz) == (0, 0, 0) {
                    continue;
                }
                let second = first.offset(dx, dy, dz);
                let mut grid = VoxelGrid::new(13, 5, 13);
                grid.fill(
                    VoxelCoord::new(0, 0, 0),
                    VoxelCoord::new(12, 0, 12),
                    CellKind::Solid(material::FLOOR),
                );
                if dy == 1 && (dx, dz) != (0, 0) {
                    grid.set(second.below(), CellKind::Solid(material::PILLAR));
                }
                let geom = greedy_merge(&grid);
                let mut case = StackCase {
                    offset: (dx, dy, dz),
                    loaded: (dx, dy, dz) == (0, 1, 0),
                    first_picked: false,
                    second_picked: false,
                };
                for side in 0..4 {
                    let yaw = side as f64 * FRAC_PI_2;
                    for pitch in [-FRAC_PI_4, 0.0] {
                        let mut pose = Pose::new(Vec3::default(), yaw);
                        pose.set_pitch(pitch);
                        let back = pose.forward_flat() * -1.8;
                        pose.position = first.center() + back + Vec3::new(0.0, -0.5, 0.0);
                        let mut world = World {
                            agents: vec![AgentState::new(pose)],
                            objects: vec![
                                DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, first),
                                DynamicObject::new(ObjectId(1), ObjectKind::MovableBox, second),
                            ],
                        };
                        let mut ev = AgentEvents::default();
                        interact(&mut world, 0, &geom, &physics, &rules, &mut ev);
                        match ev.picked_up {
                            Some(ObjectId(0)) => case.first_picked = true,
                            Some(ObjectId(1)) => case.second_picked = true,
                            _ => {}
                        }
                    }
                }
                cases.push(case);
            }
        }
    }
    cases
}
