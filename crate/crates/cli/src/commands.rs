use std::fmt;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use comanip_core::sim::run_session;
use comanip_core::tasks::{enumerate_valid_sets_with, TOTAL_ORDERINGS};
use comanip_core::{io, Execution, RunConfig};
use serde::Serialize;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;
pub const EXIT_PARTIAL: u8 = 4;

/// Marks failures caused by the user's configuration or flags.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn exit_code(e: &anyhow::Error) -> ExitCode {
    if e.chain().any(|c| c.is::<ConfigError>()) {
        ExitCode::from(EXIT_CONFIG)
    } else {
        ExitCode::from(EXIT_RUNTIME)
    }
}

pub fn config_error(msg: impl fmt::Display) -> anyhow::Error {
    ConfigError(msg.to_string()).into()
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Library<'a> {
    workspace_half_width: f64,
    count: usize,
    total: usize,
    sets: Vec<Vec<&'a str>>,
}

pub fn enumerate(workspace: f64, out: Option<&Path>, exec: Execution) -> Result<ExitCode> {
    let sets = enumerate_valid_sets_with(workspace, exec).map_err(config_error)?;
    println!("{} / {}", sets.len(), TOTAL_ORDERINGS);
    if let Some(out) = out {
        let lib = Library {
            workspace_half_width: workspace,
            count: sets.len(),
            total: TOTAL_ORDERINGS,
            sets: sets
                .iter()
                .map(|s| s.ordering.iter().map(|t| t.code()).collect())
                .collect(),
        };
        fs::write(out, serde_json::to_string(&lib)?)
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn simulate(
    config: Option<&Path>,
    sets: Option<usize>,
    seed: Option<u64>,
    out: &Path,
    exec: Execution,
) -> Result<ExitCode> {
    let mut cfg = load_config(config)?;
    if let Some(n) = sets {
        cfg.n_sets = n;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(config_error)?;
    let run = run_session(&cfg, exec).map_err(|e| match e {
        comanip_core::Error::Parameter { .. } | comanip_core::Error::Configuration(_) => {
            config_error(e)
        }
        other => anyhow::Error::new(other).context("simulation failed"),
    })?;
    io::write_session(out, &run).with_context(|| format!("writing {}", out.display()))?;
    let trials: Vec<_> = run.log.trials().collect();
    let done = trials.iter().filter(|t| t.completed).count();
    println!(
        "{} sets, {} trials ({} completed) -> {}",
        cfg.n_sets,
        trials.len(),
        done,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}
