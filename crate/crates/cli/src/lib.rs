//! Command-line front end of `rse1d`: scenario files in, CSV/JSON/gnuplot out.

pub mod config;
pub mod output;
mod pipeline;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::{ScenarioConfig, Task};
pub use pipeline::{execute, render_json, tolerances, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("task {task} failed: {source}")]
    Solver {
        task: String,
        #[source]
        source: rse1d_core::Error,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    /// 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// Loads `config_path`, runs it and writes the outputs. A relative output
/// directory is taken relative to the config file.
pub fn run(config_path: &Path) -> Result<(RunReport, Vec<PathBuf>), CliError> {
    let cfg = ScenarioConfig::load(config_path)?;
    let dir = output_dir(&cfg, config_path);
    let report = execute(&cfg)?;
    let written = report.outputs.write_all(&dir)?;
    Ok((report, written))
}

pub fn output_dir(cfg: &ScenarioConfig, config_path: &Path) -> PathBuf {
    let dir = &cfg.output.directory;
    if dir.is_relative() {
        config_path.parent().unwrap_or(Path::new(".")).join(dir)
    } else {
        dir.clone()
    }
}

/// Applies `RSE1D_THREADS` (0 or unset: one thread per core) and fixes the
/// dense linear algebra to a single thread so that results do not depend on
/// the work split.
pub fn init_threads() {
    faer::set_global_parallelism(faer::Par::Seq);
    if let Some(n) = std::env::var("RSE1D_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
