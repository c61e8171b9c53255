//! Scenario-driven front end for `thermocp-core`: reads a TOML scenario,
//! runs one computation and writes CSV tables.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::Command;
pub use config::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Output(_) => 4,
            CliError::Compute(_) => 1,
        }
    }
}

/// Loads `config`, applies overrides and runs `command` on a pool of
/// `threads` workers (the global pool when `None`).
pub fn run(
    command: Command,
    config: &Path,
    out: Option<&Path>,
    tol: Option<f64>,
    threads: Option<usize>,
) -> Result<Vec<PathBuf>, CliError> {
    let mut scenario = Scenario::load(config)?;
    if let Some(rel) = tol {
        config::override_tolerance(&mut scenario.options, rel)?;
    }
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match threads {
        None => commands::run(command, &scenario, &out_dir),
        Some(0) => Err(CliError::Config("--threads must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Compute(e.to_string()))?
            .install(|| commands::run(command, &scenario, &out_dir)),
    }
}
