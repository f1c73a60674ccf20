//! Synchronous pool of `N` environments with `M` agents each.
//!
//! Environment `i` lives on worker `i mod W` for its whole lifetime and starts
//! from seed `base_seed + i`; each reset advances its seed by `N`. Results are
//! independent of `W`.
//!
//! ```no_run
//! use voxbatch::action::Action;
//! use voxbatch::scenarios::ScenarioKind;
//! use voxbatch::vec_env::{VecEnv, VecEnvConfig};
//!
//! let cfg = VecEnvConfig::new(ScenarioKind::Sokoban, 4, 1);
//! let mut env = VecEnv::make(cfg).unwrap();
//! let batch = env.step(&[Action::NOOP; 4]).unwrap();
//! assert_eq!(batch.len(), 4);
//! ```

mod replay;

use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

pub use replay::Replay;

use crate::action::Action;
use crate::error::{Result, SimError};
use crate::physics::PhysicsParams;
use crate::render::{Observation, Renderer, OBS_BYTES};
use crate::scenarios::{generate, EpisodeState, ScenarioKind, ScenarioOverrides, ScenarioParams};

#[derive(Clone, Debug, PartialEq)]
pub struct VecEnvConfig {
    pub kind: ScenarioKind,
    pub num_envs: usize,
    pub agents_per_env: usize,
    pub base_seed: u64,
    pub num_workers: usize,
    pub overrides: ScenarioOverrides,
}

impl VecEnvConfig {
    /// One worker, seed 0, default scenario parameters.
    pub fn new(kind: ScenarioKind, num_envs: usize, agents_per_env: usize) -> Self {
        Self {
            kind,
            num_envs,
            agents_per_env,
            base_seed: 0,
            num_workers: 1,
            overrides: ScenarioOverrides::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.num_workers = workers;
        self
    }

    pub fn params(&self) -> Result<ScenarioParams> {
        ScenarioParams::defaults(self.kind).with_overrides(self.kind, &self.overrides)
    }

    pub fn validate(&self) -> Result<ScenarioParams> {
        if self.num_envs == 0 {
            return Err(SimError::InvalidConfig("num_envs must be at least 1".into()));
        }
        if self.num_workers == 0 {
            return Err(SimError::InvalidConfig("num_workers must be at least 1".into()));
        }
        if !(1..=8).contains(&self.agents_per_env) {
            return Err(SimError::InvalidConfig(format!(
                "agents_per_env must be in 1..=8, got {}",
                self.agents_per_env
            )));
        }
        self.params()
    }

    pub fn batch_size(&self) -> usize {
        self.num_envs * self.agents_per_env
    }

    /// Worker owning environment `env`.
    pub fn worker_of(&self, env: usize) -> usize {
        env % self.num_workers
    }
}

/// One synchronous step's results in env-major, agent-minor order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepBatch {
    /// `len() * OBS_BYTES` bytes, one RGB frame per slot.
    pub observations: Vec<u8>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    /// The final true objective where `dones` is set, the running value elsewhere.
    pub true_objectives: Vec<f64>,
}

impl StepBatch {
    fn with_len(n: usize) -> Self {
        Self {
            observations: vec![0; n * OBS_BYTES],
            rewards: vec![0.0; n],
            dones: vec![false; n],
            true_objectives: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn observation(&self, slot: usize) -> &[u8] {
        &self.observations[slot * OBS_BYTES..(slot + 1) * OBS_BYTES]
    }
}

/// Slot results for the environments one worker owns, in ascending env order.
struct WorkerOutput {
    batch: StepBatch,
    busy: Duration,
}

enum Command {
    Step(Arc<[Action]>, WorkerOutput),
}

struct Env {
    index: usize,
    seed: u64,
    state: EpisodeState,
}

struct Worker {
    envs: Vec<Env>,
    agents: usize,
    num_envs: u64,
    kind: ScenarioKind,
    params: ScenarioParams,
    physics: PhysicsParams,
    renderer: Renderer,
    frame: Observation,
}

impl Worker {
    fn render_all(&mut self, out: &mut StepBatch) {
        for (k, env) in self.envs.iter().enumerate() {
            for a in 0..self.agents {
                let slot = k * self.agents + a;
                env.state.render(a, &mut self.renderer, &mut self.frame);
                out.observations[slot * OBS_BYTES..(slot + 1) * OBS_BYTES].copy_from_slice(self.frame.as_bytes());
            }
        }
    }

    fn step(&mut self, actions: &[Action], out: &mut StepBatch) -> Result<()> {
        let m = self.agents;
        for (k, env) in self.envs.iter_mut().enumerate() {
            let acts = &actions[env.index * m..(env.index + 1) * m];
            let outcome = env.state.step(acts, &self.physics)?;
            for a in 0..m {
                let slot = k * m + a;
                out.rewards[slot] = outcome.rewards[a];
                out.dones[slot] = outcome.done;
                out.true_objectives[slot] = outcome.true_objective;
            }
            if outcome.done {
                env.seed = env.seed.wrapping_add(self.num_envs);
                env.state = generate(self.kind, env.seed, m, &self.params)?;
            }
        }
        self.render_all(out);
        Ok(())
    }

    fn run(mut self, commands: Receiver<Command>, results: Sender<Result<WorkerOutput>>) {
        while let Ok(Command::Step(actions, mut out)) = commands.recv() {
            let t0 = Instant::now();
            let r = self.step(&actions, &mut out.batch).map(|()| {
                out.busy = t0.elapsed();
                out
            });
            if results.send(r).is_err() {
                break;
            }
        }
    }
}

struct WorkerHandle {
    envs: Vec<usize>,
    commands: Sender<Command>,
    results: Receiver<Result<WorkerOutput>>,
    thread: Option<JoinHandle<()>>,
    spare: Option<WorkerOutput>,
    busy: Duration,
}

pub struct VecEnv {
    config: VecEnvConfig,
    workers: Vec<WorkerHandle>,
    batch: StepBatch,
    steps: u64,
    closed: bool,
}

impl VecEnv {
    /// Generates every environment and renders the first observations, which
    /// are available from [`VecEnv::last_batch`].
    pub fn make(config: VecEnvConfig) -> Result<Self> {
        let params = config.validate()?;
        let n = config.num_envs;
        let m = config.agents_per_env;
        let w = config.num_workers.min(n);
        let mut workers = Vec::with_capacity(w);
        let mut batch = StepBatch::with_len(n * m);
        for wi in 0..w {
            let indices: Vec<usize> = (wi..n).step_by(w).collect();
            let mut envs = Vec::with_capacity(indices.len());
            for &i in &indices {
                let seed = config.base_seed.wrapping_add(i as u64);
                envs.push(Env {
                    index: i,
                    seed,
                    state: generate(config.kind, seed, m, &params)?,
                });
            }
            let mut worker = Worker {
                envs,
                agents: m,
                num_envs: n as u64,
                kind: config.kind,
                params,
                physics: PhysicsParams::default(),
                renderer: Renderer::new(),
                frame: Observation::default(),
            };
            let mut first = StepBatch::with_len(indices.len() * m);
            worker.render_all(&mut first);
            for (k, env) in worker.envs.iter().enumerate() {
                first.true_objectives[k * m..(k + 1) * m].fill(env.state.true_objective());
            }
            scatter(&mut batch, &indices, m, &first);

            let (cmd_tx, cmd_rx) = channel();
            let (res_tx, res_rx) = channel();
            let thread = std::thread::Builder::new()
                .name(format!("voxbatch-worker-{wi}"))
                .spawn(move || worker.run(cmd_rx, res_tx))
                .map_err(SimError::from)?;
            workers.push(WorkerHandle {
                envs: indices,
                commands: cmd_tx,
                results: res_rx,
                thread: Some(thread),
                spare: Some(WorkerOutput {
                    batch: first,
                    busy: Duration::ZERO,
                }),
                busy: Duration::ZERO,
            });
        }
        Ok(Self {
            config,
            workers,
            batch,
            steps: 0,
            closed: false,
        })
    }

    pub fn config(&self) -> &VecEnvConfig {
        &self.config
    }

    /// Number of synchronous steps taken since `make`.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// The most recent batch; right after `make`, the initial observations
    /// with zero rewards and no dones.
    pub fn last_batch(&self) -> &StepBatch {
        &self.batch
    }

    /// Environments owned by each worker.
    pub fn assignment(&self) -> Vec<Vec<usize>> {
        self.workers.iter().map(|w| w.envs.clone()).collect()
    }

    /// Time each worker has spent simulating and rendering.
    pub fn worker_busy(&self) -> Vec<Duration> {
        self.workers.iter().map(|w| w.busy).collect()
    }

    /// Advances every environment one step. Finished episodes are regenerated
    /// in place and their slots carry the new episode's first frame.
    pub fn step(&mut self, actions: &[Action]) -> Result<&StepBatch> {
        if self.closed {
            return Err(SimError::Closed);
        }
        let expected = self.config.batch_size();
        if actions.len() != expected {
            return Err(SimError::ActionCount {
                expected,
                got: actions.len(),
            });
        }
        let shared: Arc<[Action]> = Arc::from(actions);
        for (wi, w) in self.workers.iter_mut().enumerate() {
            let out = w.spare.take().expect("buffer returned by the previous step");
            w.commands
                .send(Command::Step(Arc::clone(&shared), out))
                .map_err(|_| SimError::WorkerLost(wi))?;
        }
        let m = self.config.agents_per_env;
        let mut first_err = None;
        for (wi, w) in self.workers.iter_mut().enumerate() {
            match w.results.recv() {
                Ok(Ok(out)) => {
                    scatter(&mut self.batch, &w.envs, m, &out.batch);
                    w.busy += out.busy;
                    w.spare = Some(out);
                }
                Ok(Err(e)) => {
                    first_err.get_or_insert(e);
                }
                Err(_) => {
                    first_err.get_or_insert(SimError::WorkerLost(wi));
                }
            }
        }
        if let Some(e) = first_err {
            self.close();
            return Err(e);
        }
        self.steps += 1;
        Ok(&self.batch)
    }

    /// Stops and joins the workers. Safe to call more than once.
    pub fn close(&mut self) {
        if self.closed {
            return;
        }
        self.closed = true;
        for w in &mut self.workers {
            // dropping the sender ends the worker loop
            let (dead, _) = channel();
            drop(std::mem::replace(&mut w.commands, dead));
            if let Some(t) = w.thread.take() {
                let _ = t.join();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

impl Drop for VecEnv {
    fn drop(&mut self) {
        self.close();
    }
}

fn scatter(batch: &mut StepBatch, envs: &[usize], m: usize, part: &StepBatch) {
    for (k, &env) in envs.iter().enumerate() {
        for a in 0..m {
            let src = k * m + a;
            let dst = env * m + a;
            batch.rewards[dst] = part.rewards[src];
            batch.dones[dst] = part.dones[src];
            batch.true_objectives[dst] = part.true_objectives[src];
            batch.observations[dst * OBS_BYTES..(dst + 1) * OBS_BYTES].copy_from_slice(part.observation(src));
        }
    }
}

#[cfg(test)]
mod tests;
