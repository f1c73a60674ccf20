//! Throughput measurement and single-environment rollouts.

use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::action::{unflatten_action, Action, NUM_ACTIONS};
use crate::error::{Result, SimError};
use crate::render::{OBS_HEIGHT, OBS_WIDTH};
use crate::rng::SeededRng;
use crate::scenarios::{ScenarioKind, ScenarioOverrides};
use crate::vec_env::{Replay, StepBatch, VecEnv, VecEnvConfig};

/// Shortest measured window accepted by [`run_benchmark`].
pub const MIN_SECONDS: f64 = 10.0;
/// Stepping time discarded before measurement starts.
pub const WARMUP_SECONDS: f64 = 2.0;

/// Uniform over the flat action space, seeded.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    rng: SeededRng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SeededRng::new(seed),
        }
    }

    pub fn fill(&mut self, out: &mut [Action]) {
        for a in out {
            *a = unflatten_action(self.rng.below(NUM_ACTIONS as u64) as u16).expect("code below NUM_ACTIONS");
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub scenario: ScenarioKind,
    pub workers: usize,
    pub envs_per_worker: usize,
    pub agents: usize,
    pub seconds: f64,
    pub warmup_seconds: f64,
    pub seed: u64,
    pub overrides: ScenarioOverrides,
}

impl BenchConfig {
    pub fn new(scenario: ScenarioKind, workers: usize, envs_per_worker: usize, agents: usize, seconds: f64) -> Self {
        Self {
            scenario,
            workers,
            envs_per_worker,
            agents,
            seconds,
            warmup_seconds: WARMUP_SECONDS,
            seed: 0,
            overrides: ScenarioOverrides::default(),
        }
    }

    pub fn vec_env_config(&self) -> VecEnvConfig {
        VecEnvConfig {
            kind: self.scenario,
            num_envs: self.workers * self.envs_per_worker,
            agents_per_env: self.agents,
            base_seed: self.seed,
            num_workers: self.workers,
            overrides: self.overrides.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorkerReport {
    pub worker: usize,
    pub envs: usize,
    pub observations: u64,
    pub obs_per_second: f64,
    /// Share of the measured window the worker spent simulating and rendering.
    pub utilization: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub scenario: ScenarioKind,
    pub num_workers: usize,
    pub envs_per_worker: usize,
    pub agents_per_env: usize,
    pub duration_seconds: f64,
    pub steps: u64,
    pub total_observations: u64,
    pub obs_per_second: f64,
    pub per_worker: Vec<WorkerReport>,
}

impl BenchReport {
    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = format!(
            "scenario {}  workers {}  envs/worker {}  agents {}\n\
             duration {:.2} s  steps {}  observations {}  obs/s {:.0}\n",
            self.scenario,
            self.num_workers,
            self.envs_per_worker,
            self.agents_per_env,
            self.duration_seconds,
            self.steps,
            self.total_observations,
            self.obs_per_second
        );
        s.push_str("worker  envs  observations      obs/s  busy\n");
        for w in &self.per_worker {
            s.push_str(&format!(
                "{:>6}  {:>4}  {:>12}  {:>9.0}  {:>3.0}%\n",
                w.worker,
                w.envs,
                w.observations,
                w.obs_per_second,
                100.0 * w.utilization
            ));
        }
        s
    }
}

/// Steps a pool with a seeded random policy and reports throughput.
/// Requires at least [`MIN_SECONDS`] of measurement.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.seconds.is_nan() || cfg.seconds < MIN_SECONDS {
        return Err(SimError::InvalidConfig(format!(
            "benchmark needs at least {MIN_SECONDS} s, got {}",
            cfg.seconds
        )));
    }
    measure(cfg)
}

/// [`run_benchmark`] without the minimum-duration check, for short smoke runs.
pub fn measure(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.envs_per_worker == 0 {
        return Err(SimError::InvalidConfig("envs_per_worker must be at least 1".into()));
    }
    let mut env = VecEnv::make(cfg.vec_env_config())?;
    let mut policy = RandomPolicy::new(cfg.seed ^ 0x5EED);
    let mut actions = vec![Action::NOOP; env.config().batch_size()];

    let warmup = Duration::from_secs_f64(cfg.warmup_seconds.max(0.0));
    let t0 = Instant::now();
    while t0.elapsed() < warmup {
        policy.fill(&mut actions);
        env.step(&actions)?;
    }

    let busy0 = env.worker_busy();
    let window = Duration::from_secs_f64(cfg.seconds.max(0.0));
    let start = Instant::now();
    let mut steps = 0u64;
    while start.elapsed() < window || steps == 0 {
        policy.fill(&mut actions);
        env.step(&actions)?;
        steps += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let busy1 = env.worker_busy();
    let assignment = env.assignment();
    env.close();

    let m = cfg.agents as u64;
    let per_worker = assignment
        .iter()
        .enumerate()
        .map(|(w, envs)| {
            let observations = envs.len() as u64 * m * steps;
            WorkerReport {
                worker: w,
                envs: envs.len(),
                observations,
                obs_per_second: observations as f64 / elapsed,
                utilization: (busy1[w] - busy0[w]).as_secs_f64() / elapsed,
            }
        })
        .collect();
    let total = cfg.workers as u64 * cfg.envs_per_worker as u64 * m * steps;
    Ok(BenchReport {
        scenario: cfg.scenario,
        num_workers: cfg.workers,
        envs_per_worker: cfg.envs_per_worker,
        agents_per_env: cfg.agents,
        duration_seconds: elapsed,
        steps,
        total_observations: total,
        obs_per_second: total as f64 / elapsed,
        per_worker,
    })
}

/// Where rollout actions come from.
#[derive(Clone, Debug)]
pub enum RolloutPolicy {
    Random { seed: u64 },
    /// Actions from a recording; the run uses the recording's pool config.
    Script(Replay),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RolloutSummary {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub steps: usize,
    pub agents: usize,
    /// Per step, per slot.
    pub rewards: Vec<Vec<f64>>,
    pub total_reward: f64,
    pub episodes_finished: u32,
    /// Of the last finished episode, or the running value of the current one
    /// if none finished.
    pub true_objective: f64,
}

/// Binary PPM of one observation slot.
pub fn ppm_bytes(rgb: &[u8]) -> Vec<u8> {
    let mut out = format!("P6\n{OBS_WIDTH} {OBS_HEIGHT}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}

fn dump(dir: &Path, batch: &StepBatch, agents: usize, t: usize) -> Result<()> {
    for slot in 0..batch.len() {
        let name = format!("env{}_agent{}_step{}.ppm", slot / agents, slot % agents, t);
        std::fs::write(dir.join(name), ppm_bytes(batch.observation(slot)))?;
    }
    Ok(())
}

/// Runs one environment for `steps` steps (auto-resetting like the pool).
/// With `dump_dir`, writes the initial frame as step 0 and one frame per step.
pub fn run_rollout(
    scenario: ScenarioKind,
    seed: u64,
    steps: usize,
    agents: usize,
    policy: RolloutPolicy,
    dump_dir: Option<&Path>,
) -> Result<RolloutSummary> {
    let (config, script, mut random) = match policy {
        RolloutPolicy::Random { seed: s } => (
            VecEnvConfig::new(scenario, 1, agents).with_seed(seed),
            None,
            Some(RandomPolicy::new(s)),
        ),
        RolloutPolicy::Script(r) => {
            if r.steps() < steps {
                return Err(SimError::Replay(format!("script has {} steps, {steps} requested", r.steps())));
            }
            (r.config.clone(), Some(r), None)
        }
    };
    if let Some(d) = dump_dir {
        std::fs::create_dir_all(d)?;
    }
    let slots = config.batch_size();
    let m = config.agents_per_env;
    let summary_seed = config.base_seed;
    let summary_kind = config.kind;
    let mut env = VecEnv::make(config)?;
    if let Some(d) = dump_dir {
        dump(d, env.last_batch(), m, 0)?;
    }
    let mut objective = env.last_batch().true_objectives[0];
    let mut finished = 0;
    let mut rewards = Vec::with_capacity(steps);
    let mut actions = vec![Action::NOOP; slots];
    for t in 0..steps {
        match (&script, &mut random) {
            (Some(r), _) => actions = r.step_actions(t)?,
            (None, Some(p)) => p.fill(&mut actions),
            (None, None) => unreachable!("a policy is always set"),
        }
        let b = env.step(&actions)?;
        rewards.push(b.rewards.clone());
        if b.dones[0] {
            finished += 1;
            objective = b.true_objectives[0];
        } else if finished == 0 {
            objective = b.true_objectives[0];
        }
        if let Some(d) = dump_dir {
            dump(d, b, m, t + 1)?;
        }
    }
    env.close();
    Ok(RolloutSummary {
        scenario: summary_kind,
        seed: summary_seed,
        steps,
        agents: m,
        total_reward: rewards.iter().flatten().sum(),
        rewards,
        episodes_finished: finished,
        true_objective: objective,
    })
}
