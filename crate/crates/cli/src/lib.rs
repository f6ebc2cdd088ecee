//! Batch front end for `lpbk`: one JSON job per invocation.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid config or input,
//! 3 reports could not be written.

pub mod config;
pub mod input;
pub mod job;
pub mod output;

use std::path::Path;

pub use config::{parse_config, JobConfig};
pub use job::{run_job, JobOutcome};

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Compute(String),
    #[error("write error: {0}")]
    Write(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Config(_) | JobError::Input(_) | JobError::Compute(_) => 2,
            JobError::Write(_) | JobError::Internal(_) => 3,
        }
    }
}

/// Reads the job at `config`, applies the seed override and runs it.
pub fn run_file(config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<JobOutcome, JobError> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| JobError::Config(format!("{}: {e}", config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    run_job(&cfg, out_dir)
}
