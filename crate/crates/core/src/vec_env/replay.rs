//! Record/replay files: a text header holding the pool config, then every
//! step's flattened actions as little-endian `u16`.
//!
//! ```text
//! VOXREPLAY 1
//! kind=Sokoban
//! num_envs=2
//! agents_per_env=1
//! base_seed=7
//! num_workers=1
//! override.episode_length=64
//! steps=3
//! end
//! <steps * num_envs * agents_per_env * 2 bytes>
//! ```

use std::path::Path;

use crate::action::{flatten_action, unflatten_action, Action};
use crate::error::{Result, SimError};

use super::{StepBatch, VecEnv, VecEnvConfig};

const MAGIC: &str = "VOXREPLAY 1";

#[derive(Clone, Debug, PartialEq)]
pub struct Replay {
    pub config: VecEnvConfig,
    actions: Vec<u16>,
}

impl Replay {
    pub fn new(config: VecEnvConfig) -> Self {
        Self {
            config,
            actions: Vec::new(),
        }
    }

    pub fn steps(&self) -> usize {
        self.actions.len() / self.config.batch_size()
    }

    pub fn record(&mut self, actions: &[Action]) -> Result<()> {
        let expected = self.config.batch_size();
        if actions.len() != expected {
            return Err(SimError::ActionCount {
                expected,
                got: actions.len(),
            });
        }
        self.actions.extend(actions.iter().map(flatten_action));
        Ok(())
    }

    pub fn step_actions(&self, t: usize) -> Result<Vec<Action>> {
        let b = self.config.batch_size();
        self.actions
            .get(t * b..(t + 1) * b)
            .ok_or_else(|| SimError::Replay(format!("step {t} out of range")))?
            .iter()
            .map(|&code| unflatten_action(code))
            .collect()
    }

    /// Canonical config text, one `key=value` per line.
    pub fn header(&self) -> String {
        let c = &self.config;
        let mut h = format!(
            "{MAGIC}\nkind={}\nnum_envs={}\nagents_per_env={}\nbase_seed={}\nnum_workers={}\n",
            c.kind, c.num_envs, c.agents_per_env, c.base_seed, c.num_workers
        );
        let o = &c.overrides;
        for (key, v) in [
            ("episode_length", o.episode_length),
            ("rooms", o.rooms),
            ("diamonds", o.diamonds),
            ("boxes", o.boxes),
            ("maze_radius", o.maze_radius),
            ("items", o.items),
        ] {
            if let Some(v) = v {
                h.push_str(&format!("override.{key}={v}\n"));
            }
        }
        h.push_str(&format!("steps={}\nend\n", self.steps()));
        h
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header().into_bytes();
        for a in &self.actions {
            out.extend_from_slice(&a.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| SimError::Replay(m);
        let mut pos = 0;
        let mut lines = Vec::new();
        loop {
            let rest = &bytes[pos..];
            let nl = rest.iter().position(|&b| b == b'\n').ok_or_else(|| bad("header not terminated".into()))?;
            let line = std::str::from_utf8(&rest[..nl]).map_err(|_| bad("header is not UTF-8".into()))?;
            pos += nl + 1;
            if line == "end" {
                break;
            }
            lines.push(line);
        }
        if lines.first() != Some(&MAGIC) {
            return Err(bad(format!("missing `{MAGIC}` magic line")));
        }
        let mut config = VecEnvConfig::new(crate::scenarios::ScenarioKind::Collect, 0, 0);
        let mut have_kind = false;
        let mut steps = None;
        for line in &lines[1..] {
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("malformed line `{line}`")))?;
            let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("`{key}` is not an integer: `{v}`")));
            match key {
                "kind" => {
                    config.kind = value.parse()?;
                    have_kind = true;
                }
                "num_envs" => config.num_envs = int(value)? as usize,
                "agents_per_env" => config.agents_per_env = int(value)? as usize,
                "base_seed" => config.base_seed = int(value)?,
                "num_workers" => config.num_workers = int(value)? as usize,
                "steps" => steps = Some(int(value)? as usize),
                _ => {
                    let name = key
                        .strip_prefix("override.")
                        .ok_or_else(|| bad(format!("unknown key `{key}`")))?;
                    let v = Some(int(value)? as u32);
                    let o = &mut config.overrides;
                    match name {
                        "episode_length" => o.episode_length = v,
                        "rooms" => o.rooms = v,
                        "diamonds" => o.diamonds = v,
                        "boxes" => o.boxes = v,
                        "maze_radius" => o.maze_radius = v,
                        "items" => o.items = v,
                        _ => return Err(bad(format!("unknown override `{name}`"))),
                    }
                }
            }
        }
        if !have_kind {
            return Err(bad("missing `kind`".into()));
        }
        config.validate()?;
        let steps = steps.ok_or_else(|| bad("missing `steps`".into()))?;
        let body = &bytes[pos..];
        let expected = steps * config.batch_size() * 2;
        if body.len() != expected {
            return Err(bad(format!("expected {expected} action bytes, found {}", body.len())));
        }
        let actions: Vec<u16> = body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
        for &a in &actions {
            unflatten_action(a)?;
        }
        Ok(Self { config, actions })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Re-runs the recording, optionally with a different worker count,
    /// handing every batch (the initial one as step 0) to `visit`.
    pub fn play(&self, workers: Option<usize>, mut visit: impl FnMut(usize, &StepBatch)) -> Result<()> {
        let mut config = self.config.clone();
        if let Some(w) = workers {
            config.num_workers = w;
        }
        let mut env = VecEnv::make(config)?;
        visit(0, env.last_batch());
        for t in 0..self.steps() {
            let actions = self.step_actions(t)?;
            let batch = env.step(&actions)?;
            visit(t + 1, batch);
        }
        env.close();
        Ok(())
    }
}
