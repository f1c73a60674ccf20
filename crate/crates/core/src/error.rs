use thiserror::Error;

/// Contract violations and construction failures surfaced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("episode already finished")]
    EpisodeOver,
    #[error("environment pool is closed")]
    Closed,
    #[error("worker {0} terminated unexpectedly")]
    WorkerLost(usize),
    #[error("replay format: {0}")]
    Replay(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
