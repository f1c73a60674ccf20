use super::*;
use crate::action::{unflatten_action, Action, Interact, Jump, Turn, NUM_ACTIONS};
use crate::entity::{DynamicObject, ObjectKind, Pose};
use crate::grid::{world_to_voxel, CellKind, VoxelGrid};
use crate::meshing::greedy_merge;
use crate::rng::SeededRng;
use std::f64::consts::FRAC_PI_4;

/// 12x6x12 grid with a solid floor at y = 0 and walls around the border.
fn room() -> VoxelGrid {
    let mut g = VoxelGrid::new(12, 6, 12);
    g.fill(VoxelCoord::new(0, 0, 0), VoxelCoord::new(11, 0, 11), CellKind::Solid(0));
    for y in 1..4 {
        for i in 0..12 {
            for c in [
                VoxelCoord::new(i, y, 0),
                VoxelCoord::new(i, y, 11),
                VoxelCoord::new(0, y, i),
                VoxelCoord::new(11, y, i),
            ] {
                g.set(c, CellKind::Solid(1));
            }
        }
    }
    g
}

fn agent_at(x: f64, z: f64, yaw: f64) -> AgentState {
    AgentState::new(Pose::new(Vec3::new(x, 1.0, z), yaw))
}

fn step1(world: &mut World, a: Action, geom: &StaticGeometry, rules: &InteractionRules) -> AgentEvents {
    step_environment(world, &[a], geom, &PhysicsParams::default(), rules)
        .unwrap()
        .agents
        .remove(0)
}

fn noop() -> Action {
    Action::NOOP
}

#[test]
fn noop_is_fixed_point() {
    let geom = greedy_merge(&room());
    let mut w = World {
        agents: vec![agent_at(5.5, 5.5, 0.3)],
        objects: vec![DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, VoxelCoord::new(3, 1, 3))],
    };
    let before = w.clone();
    for _ in 0..200 {
        step1(&mut w, noop(), &geom, &InteractionRules::default());
    }
    assert_eq!(w, before);
}

#[test]
fn action_count_mismatch_is_error() {
    let geom = greedy_merge(&room());
    let mut w = World {
        agents: vec![agent_at(5.5, 5.5, 0.0)],
        objects: vec![],
    };
    let err = step_environment(&mut w, &[], &geom, &PhysicsParams::default(), &InteractionRules::default());
    assert_eq!(err, Err(SimError::ActionCount { expected: 1, got: 0 }));
}

#[test]
fn jump_apex_matches_discrete_and_continuous() {
    let geom = greedy_merge(&room());
    let p = PhysicsParams::default();
    let mut w = World {
        agents: vec![agent_at(5.5, 5.5, 0.0)],
        objects: vec![],
    };
    let y0 = w.agents[0].pose.position.y;
    let jump = Action {
        jump: Jump::Jump,
        ..Action::NOOP
    };
    step1(&mut w, jump, &geom, &InteractionRules::default());
    let mut apex = w.agents[0].pose.position.y - y0;
    for _ in 0..40 {
        step1(&mut w, noop(), &geom, &InteractionRules::default());
        apex = apex.max(w.agents[0].pose.position.y - y0);
    }
    // Semi-implicit Euler: sum of the positive velocities v - k|g|dt, times dt.
    let mut v = p.jump_velocity;
    let mut discrete = 0.0;
    loop {
        v += p.gravity * p.dt;
        if v <= 0.0 {
            break;
        }
        discrete += v * p.dt;
    }
    assert!((discrete - 17.0 / 15.0).abs() < 1e-12);
    assert!((apex - discrete).abs() < 1e-9, "apex {apex}");
    assert!((apex - p.jump_apex()).abs() <= p.jump_velocity * p.dt);
    assert!(w.agents[0].grounded);
    assert!((w.agents[0].pose.position.y - y0).abs() < 1e-9);
}

#[test]
fn walking_into_wall_leaves_tiny_gap() {
    let geom = greedy_merge(&room());
    // wall face at z = 11; agent front face starts 0.5 away
    let mut w = World {
        agents: vec![agent_at(5.5, 11.0 - 0.3 - 0.5, 0.0)],
        objects: vec![],
    };
    for _ in 0..10 {
        step1(&mut w, Action::forward(), &geom, &InteractionRules::default());
    }
    let gap = 11.0 - w.agents[0].aabb().max.z;
    assert!((0.0..=1e-6).contains(&gap), "gap {gap}");
}

#[test]
fn cannot_walk_up_full_block_but_can_jump_onto_it() {
    let mut g = room();
    g.fill(VoxelCoord::new(1, 1, 7), VoxelCoord::new(10, 1, 7), CellKind::Solid(2));
    let geom = greedy_merge(&g);
    let mut w = World {
        agents: vec![agent_at(5.5, 5.5, 0.0)],
        objects: vec![],
    };
    for _ in 0..20 {
        step1(&mut w, Action::forward(), &geom, &InteractionRules::default());
    }
    assert!(w.agents[0].pose.position.z < 7.0);
    assert!((w.agents[0].pose.position.y - 1.0).abs() < 1e-9);
    let jump_fwd = Action {
        jump: Jump::Jump,
        ..Action::forward()
    };
    step1(&mut w, jump_fwd, &geom, &InteractionRules::default());
    for _ in 0..20 {
        step1(&mut w, Action::forward(), &geom, &InteractionRules::default());
    }
    assert!(w.agents[0].pose.position.z > 7.0);
}

fn look(pitch: f64) -> impl Fn(&mut World) {
    move |w: &mut World| w.agents[0].pose.set_pitch(pitch)
}

fn use_action() -> Action {
    Action {
        interact: Interact::Interact,
        ..Action::NOOP
    }
}

#[test]
fn stacked_box_support_rule() {
    let geom = greedy_merge(&room());
    let bottom = VoxelCoord::new(5, 1, 5);
    let top = VoxelCoord::new(5, 2, 5);
    let make = || World {
        agents: vec![agent_at(5.5, 4.0, 0.0)],
        objects: vec![
            DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, bottom),
            DynamicObject::new(ObjectId(1), ObjectKind::MovableBox, top),
        ],
    };
    let rules = InteractionRules::default();
    // Looking at the loaded bottom box: refused.
    let mut w = make();
    look(-FRAC_PI_4)(&mut w);
    let ev = step1(&mut w, use_action(), &geom, &rules);
    assert_eq!(ev.picked_up, None);
    assert_eq!(w.agents[0].carrying, None);
    // Looking level at the top box: allowed.
    look(0.0)(&mut w);
    let ev = step1(&mut w, use_action(), &geom, &rules);
    assert_eq!(ev.picked_up, Some(ObjectId(1)));
    // Bottom box is now unloaded, but hands are full; place the top one back.
    look(-FRAC_PI_4)(&mut w);
    let ev = step1(&mut w, use_action(), &geom, &rules);
    assert!(ev.picked_up.is_none());
}

#[test]
fn support_rule_exhaustive_neighbors() {
    // Over all 26 neighbor placements of a second box, the first box is loaded
    // iff the second sits directly on top of it.
    let base = VoxelCoord::new(5, 2, 5);
    for dx in -1..=1 {
        for dy in -1..=1 {
            for dz in -1..=1 {
                if (dx, dy, dz) == (0, 0, 0) {
                    continue;
                }
                let w = World {
                    agents: vec![],
                    objects: vec![
                        DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, base),
                        DynamicObject::new(ObjectId(1), ObjectKind::MovableBox, base.offset(dx, dy, dz)),
                    ],
                };
                assert_eq!(interact::has_load(&w, 0), (dx, dy, dz) == (0, 1, 0), "offset {dx},{dy},{dz}");
                assert_eq!(interact::has_load(&w, 1), (dx, dy, dz) == (0, -1, 0), "offset {dx},{dy},{dz}");
            }
        }
    }
    // an agent standing on the box also loads it
    let w = World {
        agents: vec![AgentState::new(Pose::new(Vec3::new(5.5, 3.0, 5.5), 0.0))],
        objects: vec![DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, base)],
    };
    assert!(interact::has_load(&w, 0));
}

#[test]
fn pick_then_place_round_trips_cell() {
    let geom = greedy_merge(&room());
    let cell = VoxelCoord::new(5, 1, 5);
    let mut w = World {
        agents: vec![agent_at(5.5, 4.0, 0.0)],
        objects: vec![DynamicObject::new(ObjectId(7), ObjectKind::MovableBox, cell)],
    };
    let original = w.objects[0].aabb;
    look(-FRAC_PI_4)(&mut w);
    let rules = InteractionRules::default();
    let ev = step1(&mut w, use_action(), &geom, &rules);
    assert_eq!(ev.picked_up, Some(ObjectId(7)));
    let ev = step1(&mut w, use_action(), &geom, &rules);
    let placed = ev.placed.expect("placement");
    assert_eq!(placed.cell, cell);
    assert_eq!(placed.height, 1);
    assert_eq!(w.objects[0].aabb, original);
    assert!(w.objects[0].is_free());
}

#[test]
fn placing_on_a_box_reports_stack_height() {
    let geom = greedy_merge(&room());
    let mut w = World {
        agents: vec![agent_at(5.5, 4.5, 0.0)],
        objects: vec![
            DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, VoxelCoord::new(5, 1, 5)),
            DynamicObject::new(ObjectId(1), ObjectKind::MovableBox, VoxelCoord::new(3, 1, 3)),
        ],
    };
    let rules = InteractionRules::default();
    // carry box 1 directly
    w.objects[1].state = ObjectState::Carried(0);
    w.agents[0].carrying = Some(ObjectId(1));
    look(-FRAC_PI_4)(&mut w);
    let ev = step1(&mut w, use_action(), &geom, &rules);
    let placed = ev.placed.expect("placement");
    assert_eq!(placed.cell, VoxelCoord::new(5, 2, 5));
    assert_eq!(placed.height, 2);
}

#[test]
fn carried_object_follows_agent() {
    let geom = greedy_merge(&room());
    let mut w = World {
        agents: vec![agent_at(5.5, 4.0, 0.0)],
        objects: vec![DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, VoxelCoord::new(5, 1, 5))],
    };
    look(-FRAC_PI_4)(&mut w);
    let rules = InteractionRules::default();
    step1(&mut w, use_action(), &geom, &rules);
    let turn = Action {
        turn: Turn::Left,
        ..Action::forward()
    };
    for _ in 0..7 {
        step1(&mut w, turn, &geom, &rules);
        let pose = w.agents[0].pose;
        let want = pose.position + pose.forward_flat() * CARRY_FORWARD + Vec3::new(0.0, CARRY_HEIGHT, 0.0);
        assert!((w.objects[0].aabb.center() - want).length() < 1e-9);
    }
}

#[test]
fn push_moves_box_one_cell() {
    let geom = greedy_merge(&room());
    let rules = InteractionRules {
        carry: false,
        push: true,
    };
    let mut w = World {
        agents: vec![agent_at(5.5, 3.5, 0.0)],
        objects: vec![DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, VoxelCoord::new(5, 1, 5))],
    };
    let mut pushes = Vec::new();
    for _ in 0..6 {
        let ev = step1(&mut w, Action::forward(), &geom, &rules);
        pushes.extend(ev.pushed);
    }
    assert_eq!(pushes.len(), 1);
    assert_eq!(pushes[0].from, VoxelCoord::new(5, 1, 5));
    assert_eq!(pushes[0].to, VoxelCoord::new(5, 1, 6));
    assert_eq!(w.objects[0].cell(), VoxelCoord::new(5, 1, 6));
}

#[test]
fn push_blocked_by_wall() {
    let geom = greedy_merge(&room());
    let rules = InteractionRules {
        carry: false,
        push: true,
    };
    let mut w = World {
        agents: vec![agent_at(5.5, 8.5, 0.0)],
        objects: vec![DynamicObject::new(ObjectId(0), ObjectKind::MovableBox, VoxelCoord::new(5, 1, 10))],
    };
    for _ in 0..10 {
        let ev = step1(&mut w, Action::forward(), &geom, &rules);
        assert!(ev.pushed.is_empty());
    }
    assert_eq!(w.objects[0].cell(), VoxelCoord::new(5, 1, 10));
}

#[test]
fn trigger_entry_fires_once() {
    let mut g = room();
    g.set(VoxelCoord::new(5, 1, 7), CellKind::ExitPad);
    let geom = greedy_merge(&g);
    let mut w = World {
        agents: vec![agent_at(5.5, 5.5, 0.0)],
        objects: vec![],
    };
    let mut entries = 0;
    for _ in 0..30 {
        let ev = step1(&mut w, Action::forward(), &geom, &InteractionRules::default());
        if ev.reached_exit {
            entries += 1;
        }
    }
    assert_eq!(entries, 1);
}

#[test]
fn pickups_are_collected_on_contact() {
    let geom = greedy_merge(&room());
    let mut w = World {
        agents: vec![agent_at(5.5, 3.5, 0.0)],
        objects: vec![DynamicObject::new(ObjectId(3), ObjectKind::GreenDiamond, VoxelCoord::new(5, 1, 6))],
    };
    let mut got = Vec::new();
    for _ in 0..15 {
        got.extend(step1(&mut w, Action::forward(), &geom, &InteractionRules::default()).collected);
    }
    assert_eq!(got, vec![(ObjectId(3), ObjectKind::GreenDiamond)]);
    assert!(w.objects.is_empty());
}

#[test]
fn falling_off_the_world_is_reported() {
    let mut g = VoxelGrid::new(4, 2, 4);
    g.set(VoxelCoord::new(1, 0, 1), CellKind::Solid(0));
    let geom = greedy_merge(&g);
    let mut w = World {
        agents: vec![agent_at(1.5, 1.5, 0.0)],
        objects: vec![],
    };
    let mut fell = false;
    for _ in 0..60 {
        fell |= step1(&mut w, Action::forward(), &geom, &InteractionRules::default()).fell_into_void;
    }
    assert!(fell);
}

fn random_world(seed: u64) -> (StaticGeometry, World) {
    let mut rng = SeededRng::new(seed);
    let mut g = room();
    for _ in 0..10 {
        let c = VoxelCoord::new(rng.range_inclusive(1, 10) as i32, 1, rng.range_inclusive(1, 10) as i32);
        g.set(c, CellKind::Solid(2));
    }
    g.set(VoxelCoord::new(2, 1, 2), CellKind::Empty);
    g.set(VoxelCoord::new(9, 1, 9), CellKind::Empty);
    let mut objects = Vec::new();
    for k in 0..4 {
        let c = VoxelCoord::new(rng.range_inclusive(1, 10) as i32, 1, rng.range_inclusive(1, 10) as i32);
        if g.get(c) == CellKind::Empty && c != VoxelCoord::new(2, 1, 2) && c != VoxelCoord::new(9, 1, 9) {
            objects.push(DynamicObject::new(ObjectId(k), ObjectKind::MovableBox, c));
        }
    }
    let w = World {
        agents: vec![agent_at(2.5, 2.5, 0.0), agent_at(9.5, 9.5, 3.0)],
        objects,
    };
    (greedy_merge(&g), w)
}

fn random_actions(rng: &mut SeededRng, n: usize) -> Vec<Action> {
    (0..n)
        .map(|_| unflatten_action(rng.below(NUM_ACTIONS as u64) as u16).unwrap())
        .collect()
}

#[test]
fn deterministic_under_identical_inputs() {
    for seed in 0..4 {
        let (geom, w0) = random_world(seed);
        let mut a = w0.clone();
        let mut b = w0;
        let mut ra = SeededRng::new(seed + 100);
        let mut rb = SeededRng::new(seed + 100);
        for rules in [InteractionRules::default(), InteractionRules { carry: false, push: true }] {
            for _ in 0..300 {
                let ea = step_environment(&mut a, &random_actions(&mut ra, 2), &geom, &PhysicsParams::default(), &rules)
                    .unwrap();
                let eb = step_environment(&mut b, &random_actions(&mut rb, 2), &geom, &PhysicsParams::default(), &rules)
                    .unwrap();
                assert_eq!(ea, eb);
            }
        }
        assert_eq!(a, b);
    }
}

#[test]
fn random_play_never_interpenetrates_and_is_energy_bounded() {
    let p = PhysicsParams::default();
    for seed in 0..6 {
        let (geom, mut w) = random_world(seed);
        let mut rng = SeededRng::new(seed);
        let rules = if seed % 2 == 0 {
            InteractionRules::default()
        } else {
            InteractionRules { carry: false, push: true }
        };
        for _ in 0..1500 {
            let actions = random_actions(&mut rng, 2);
            let heights: Vec<f64> = w.agents.iter().map(|a| a.pose.position.y).collect();
            let supports: Vec<f64> = w.agents.iter().map(|a| a.aabb().min.y).collect();
            step_environment(&mut w, &actions, &geom, &p, &rules).unwrap();
            for (k, a) in w.agents.iter().enumerate() {
                assert!(a.vertical_velocity <= p.jump_velocity + 1e-9);
                assert!(a.pose.position.y <= heights[k].max(supports[k]) + p.jump_velocity * p.dt + p.step_height + 1e-9);
                let body = a.aabb();
                for b in geom.collider_query(&body) {
                    assert!(!b.overlaps_by(&body, 1e-6), "agent {k} inside static box");
                }
                for o in w.objects.iter().filter(|o| o.is_free()) {
                    assert!(!o.aabb.overlaps_by(&body, 1e-6), "agent {k} inside object");
                }
            }
            assert!(!w.agents[0].aabb().overlaps_by(&w.agents[1].aabb(), 1e-6));
            for (i, o) in w.objects.iter().enumerate() {
                for q in &w.objects[i + 1..] {
                    if o.is_free() && q.is_free() {
                        assert!(!o.aabb.overlaps_by(&q.aabb, 1e-6));
                    }
                }
            }
        }
    }
}

#[test]
fn raycast_agrees_with_ray_march() {
    let mut rng = SeededRng::new(2024);
    let mut g = VoxelGrid::new(16, 16, 16);
    for (c, _) in g.clone().iter() {
        if rng.chance(0.08) {
            g.set(c, CellKind::Solid((rng.below(3)) as u8));
        }
    }
    let geom = greedy_merge(&g);
    let max_dist = 10.0;
    let step = 0.001;
    let mut hits = 0;
    let mut grazes = 0;
    let mut n = 0;
    while n < 10_000 {
        let o = Vec3::new(rng.next_f64() * 16.0, rng.next_f64() * 16.0, rng.next_f64() * 16.0);
        if g.get(world_to_voxel(o)).is_solid() {
            continue;
        }
        let d = Vec3::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5, rng.next_f64() - 0.5);
        if d.length() < 1e-3 {
            continue;
        }
        let d = d.normalized();
        n += 1;
        let mut march = None;
        let mut t = 0.0;
        while t <= max_dist {
            if g.get(world_to_voxel(o + d * t)).is_solid() {
                march = Some(t);
                break;
            }
            t += step;
        }
        let cast = raycast(o, d, max_dist, &geom, &[], |_| true).map(|h| h.distance);
        match (cast, march) {
            (Some(a), Some(b)) if (a - b).abs() <= 0.002 => hits += 1,
            (Some(a), Some(b)) if a < b => {
                assert!(g.get(world_to_voxel(o + d * (a + 1e-7))).is_solid(), "phantom hit at {a}");
                grazes += 1;
            }
            (Some(a), Some(b)) => panic!("cast {a} march {b}"),
            (None, None) => {}
            // rays clipping a corner for less than one march step
            (Some(a), None) => {
                assert!(g.get(world_to_voxel(o + d * (a + 1e-7))).is_solid(), "phantom hit at {a}");
                grazes += 1;
            }
            (None, Some(b)) => panic!("cast missed hit at {b}"),
        }
    }
    assert!(hits > 1000);
    assert!(grazes < 50, "{grazes} grazing disagreements");
}
