//! Experiment harness and command-line front end for `tsexplore-core`.

pub mod cli;
pub mod config;
pub mod harness;

pub use config::{make_problem, Algo, ExperimentSpec, FamilySpec, InstanceSpec, QRule};
pub use harness::{run_experiment, summarize, RunRecord, RunResult, Summary};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tsexplore_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl BenchError {
    /// 2 for failed verification, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Verification(_) => 2,
            _ => 1,
        }
    }
}
