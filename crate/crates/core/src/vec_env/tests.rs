use super::*;
use crate::action::{unflatten_action, NUM_ACTIONS};
use crate::rng::SeededRng;

fn random_actions(rng: &mut SeededRng, n: usize) -> Vec<Action> {
    (0..n)
        .map(|_| unflatten_action(rng.below(NUM_ACTIONS as u64) as u16).unwrap())
        .collect()
}

/// First frame of agent `a` in a freshly generated episode.
fn fresh_frame(kind: ScenarioKind, seed: u64, agents: usize, a: usize, params: &ScenarioParams) -> Vec<u8> {
    let s = generate(kind, seed, agents, params).unwrap();
    let mut out = Observation::default();
    s.render(a, &mut Renderer::new(), &mut out);
    out.as_bytes().to_vec()
}

#[test]
fn single_slot_shapes() {
    let env = VecEnv::make(VecEnvConfig::new(ScenarioKind::Collect, 1, 1)).unwrap();
    let b = env.last_batch();
    assert_eq!(b.len(), 1);
    assert_eq!(b.observations.len(), 27_648);
    assert_eq!(b.observation(0).len(), 27_648);
}

#[test]
fn batch_is_env_major_agent_minor() {
    let kind = ScenarioKind::ObstaclesEasy;
    let cfg = VecEnvConfig::new(kind, 4, 2).with_seed(100).with_workers(3);
    let params = cfg.params().unwrap();
    let env = VecEnv::make(cfg).unwrap();
    let b = env.last_batch();
    assert_eq!(b.len(), 8);
    for e in 0..4 {
        for a in 0..2 {
            let want = fresh_frame(kind, 100 + e as u64, 2, a, &params);
            assert!(b.observation(e * 2 + a) == want.as_slice(), "slot env{e} agent{a}");
        }
    }
    assert_eq!(env.assignment(), vec![vec![0, 3], vec![1], vec![2]]);
}

#[test]
fn equal_configs_give_identical_initial_batches() {
    let cfg = VecEnvConfig::new(ScenarioKind::HexMemory, 3, 1).with_seed(9);
    let a = VecEnv::make(cfg.clone()).unwrap();
    let b = VecEnv::make(cfg.with_workers(2)).unwrap();
    assert_eq!(a.last_batch(), b.last_batch());
}

#[test]
fn noop_in_static_scene_gives_zero_rewards() {
    let mut env = VecEnv::make(VecEnvConfig::new(ScenarioKind::Sokoban, 3, 1)).unwrap();
    for _ in 0..10 {
        let b = env.step(&[Action::NOOP; 3]).unwrap();
        assert!(b.rewards.iter().all(|&r| r == 0.0));
        assert!(b.dones.iter().all(|&d| !d));
    }
}

#[test]
fn contract_violations_are_rejected() {
    let mut cfg = VecEnvConfig::new(ScenarioKind::Collect, 2, 1);
    let mut env = VecEnv::make(cfg.clone()).unwrap();
    assert_eq!(
        env.step(&[Action::NOOP; 3]).unwrap_err(),
        SimError::ActionCount { expected: 2, got: 3 }
    );
    env.close();
    env.close();
    assert!(env.is_closed());
    assert_eq!(env.step(&[Action::NOOP; 2]).unwrap_err(), SimError::Closed);

    cfg.num_envs = 0;
    assert!(VecEnv::make(cfg.clone()).is_err());
    cfg.num_envs = 1;
    cfg.agents_per_env = 9;
    assert!(VecEnv::make(cfg.clone()).is_err());
    cfg.agents_per_env = 1;
    cfg.num_workers = 0;
    assert!(VecEnv::make(cfg.clone()).is_err());
    cfg.num_workers = 1;
    cfg.overrides.episode_length = Some(0);
    assert!(VecEnv::make(cfg).is_err());
}

#[test]
fn worker_count_does_not_change_results() {
    let base = VecEnvConfig::new(ScenarioKind::ObstaclesHard, 5, 2).with_seed(31);
    let mut rng = SeededRng::new(4);
    let script: Vec<Vec<Action>> = (0..40).map(|_| random_actions(&mut rng, 10)).collect();
    let run = |w: usize| {
        let mut env = VecEnv::make(base.clone().with_workers(w)).unwrap();
        let mut out = vec![env.last_batch().clone()];
        for acts in &script {
            out.push(env.step(acts).unwrap().clone());
        }
        out
    };
    let one = run(1);
    for w in [2, 4, 7] {
        assert!(one == run(w), "W={w} diverged");
    }
}

#[test]
fn finished_slots_show_the_next_episode() {
    let kind = ScenarioKind::Collect;
    let mut cfg = VecEnvConfig::new(kind, 2, 1).with_seed(50).with_workers(2);
    cfg.overrides.episode_length = Some(3);
    let params = cfg.params().unwrap();
    let mut env = VecEnv::make(cfg).unwrap();
    let fwd = [Action::forward(); 2];

    // oracle: the same episode stepped without any reset
    let mut oracle = generate(kind, 50, 1, &params).unwrap();
    let physics = PhysicsParams::default();
    for t in 1..=3 {
        let b = env.step(&fwd).unwrap().clone();
        oracle.step(&fwd[..1], &physics).unwrap();
        if t < 3 {
            assert_eq!(b.dones, [false, false]);
            continue;
        }
        assert_eq!(b.dones, [true, true]);
        let mut terminal = Observation::default();
        oracle.render(0, &mut Renderer::new(), &mut terminal);
        assert!(b.observation(0) != terminal.as_bytes(), "terminal frame leaked");
        assert!(b.observation(0) == fresh_frame(kind, 52, 1, 0, &params).as_slice());
        assert!(b.observation(1) == fresh_frame(kind, 53, 1, 0, &params).as_slice());
    }
    // a second reset advances the seed by N again
    for _ in 0..3 {
        env.step(&fwd).unwrap();
    }
    assert!(env.last_batch().observation(0) == fresh_frame(kind, 54, 1, 0, &params).as_slice());
}

#[test]
fn replay_round_trips_through_bytes() {
    let mut cfg = VecEnvConfig::new(ScenarioKind::Rearrangement, 2, 3).with_seed(77).with_workers(2);
    cfg.overrides.items = Some(2);
    let mut rep = Replay::new(cfg);
    let mut rng = SeededRng::new(1);
    for _ in 0..5 {
        rep.record(&random_actions(&mut rng, 6)).unwrap();
    }
    let bytes = rep.to_bytes();
    let header = String::from_utf8_lossy(&bytes[..rep.header().len()]).to_string();
    assert!(header.starts_with("VOXREPLAY 1\nkind=Rearrangement\n"));
    assert!(header.contains("override.items=2\n"));
    assert!(header.ends_with("steps=5\nend\n"));
    assert_eq!(bytes.len(), header.len() + 5 * 6 * 2);
    let back = Replay::from_bytes(&bytes).unwrap();
    assert_eq!(back, rep);
    assert_eq!(back.step_actions(4).unwrap(), rep.step_actions(4).unwrap());
}

#[test]
fn malformed_replays_are_rejected() {
    let mut rep = Replay::new(VecEnvConfig::new(ScenarioKind::Sokoban, 1, 1));
    rep.record(&[Action::NOOP]).unwrap();
    let good = rep.to_bytes();
    assert!(Replay::from_bytes(&good[..good.len() - 1]).is_err());
    assert!(Replay::from_bytes(&good[1..]).is_err());
    let text = String::from_utf8(good[..good.len() - 2].to_vec()).unwrap();
    let mut bad_code = text.clone().into_bytes();
    bad_code.extend_from_slice(&400u16.to_le_bytes());
    assert!(Replay::from_bytes(&bad_code).is_err());
    let unknown = text.replace("num_workers=1", "speed=1").into_bytes();
    assert!(Replay::from_bytes(&unknown).is_err());
    assert!(rep.record(&[Action::NOOP, Action::NOOP]).is_err());
}

#[test]
fn replay_reproduces_a_live_run() {
    let cfg = VecEnvConfig::new(ScenarioKind::TowerBuilding, 3, 2).with_seed(5);
    let mut env = VecEnv::make(cfg.clone()).unwrap();
    let mut rep = Replay::new(cfg);
    let mut rng = SeededRng::new(2);
    let mut live = vec![env.last_batch().clone()];
    for _ in 0..25 {
        let acts = random_actions(&mut rng, 6);
        rep.record(&acts).unwrap();
        live.push(env.step(&acts).unwrap().clone());
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.voxreplay");
    rep.save(&path).unwrap();
    let loaded = Replay::load(&path).unwrap();
    for w in [None, Some(3)] {
        let mut count = 0;
        loaded
            .play(w, |t, b| {
                assert!(*b == live[t], "step {t} differs");
                count += 1;
            })
            .unwrap();
        assert_eq!(count, 26);
    }
}
