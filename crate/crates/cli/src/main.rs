use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use voxbatch::bench::{run_benchmark, run_rollout, BenchConfig, RolloutPolicy};
use voxbatch::scenarios::ScenarioKind;
use voxbatch::vec_env::Replay;

#[derive(Parser)]
#[command(name = "voxbatch", version, about = "Batched voxel-world simulator tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure stepping throughput with a seeded random policy.
    Bench {
        #[arg(long)]
        scenario: ScenarioKind,
        #[arg(long)]
        workers: usize,
        #[arg(long)]
        envs_per_worker: usize,
        #[arg(long)]
        agents: usize,
        /// Measured window; at least 10.
        #[arg(long)]
        seconds: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append the report as one JSON line to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a single environment and print its reward log.
    Rollout {
        #[arg(long)]
        scenario: ScenarioKind,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        steps: usize,
        /// A recorded action file, or `random`.
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 1)]
        agents: usize,
        /// Write every frame as `env{N}_agent{M}_step{T}.ppm`.
        #[arg(long)]
        dump_frames: Option<PathBuf>,
    },
}

fn bench(cfg: BenchConfig, json: Option<PathBuf>) -> Result<()> {
    let report = run_benchmark(&cfg)?;
    let line = serde_json::to_string(&report)?;
    let mut out = std::io::stdout().lock();
    write!(out, "{}", report.table())?;
    writeln!(out, "{line}")?;
    if let Some(path) = json {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .with_context(|| format!("opening {}", path.display()))?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

fn rollout(
    scenario: ScenarioKind,
    seed: u64,
    steps: usize,
    policy: &str,
    agents: usize,
    dump_frames: Option<PathBuf>,
) -> Result<()> {
    let policy = if policy == "random" {
        RolloutPolicy::Random { seed }
    } else {
        let replay = Replay::load(policy).with_context(|| format!("reading policy script {policy}"))?;
        RolloutPolicy::Script(replay)
    };
    let summary = run_rollout(scenario, seed, steps, agents, policy, dump_frames.as_deref())?;
    let mut out = std::io::stdout().lock();
    for (t, r) in summary.rewards.iter().enumerate() {
        if r.iter().any(|&x| x != 0.0) {
            writeln!(out, "step {:>6}  rewards {:?}", t + 1, r)?;
        }
    }
    writeln!(
        out,
        "scenario {}  seed {}  steps {}  total reward {}  episodes finished {}  true objective {}",
        summary.scenario,
        summary.seed,
        summary.steps,
        summary.total_reward,
        summary.episodes_finished,
        summary.true_objective
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench {
            scenario,
            workers,
            envs_per_worker,
            agents,
            seconds,
            seed,
            json,
        } => {
            let mut cfg = BenchConfig::new(scenario, workers, envs_per_worker, agents, seconds);
            cfg.seed = seed;
            bench(cfg, json)
        }
        Command::Rollout {
            scenario,
            seed,
            steps,
            policy,
            agents,
            dump_frames,
        } => rollout(scenario, seed, steps, &policy, agents, dump_frames),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe (e.g. `| head`) is not a failure
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}
