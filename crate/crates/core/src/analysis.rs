//! Recomputes trial metrics from exported run directories.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::geometry::Vec2;
use crate::io;
use crate::metrics::{self, Axis, Histogram};
use crate::sim::{reference_from_pose, SessionLog, StepRecord, TrialLog};
use crate::tasks::Task;

pub const VELOCITY_BIN_WIDTH: f64 = 0.05;
pub const VELOCITY_RANGE: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub set_index: usize,
    pub task_index: usize,
    pub task: Task,
    pub completed: bool,
    /// Time to sustained alignment, or trace duration when unfinished.
    pub completion_time: f64,
    pub scaled_path_length: Option<f64>,
}

/// Metrics of one trial from its trace alone (plus the logged start and goal).
pub fn trial_metrics(log: &TrialLog, trace: &[StepRecord], cfg: &RunConfig) -> TrialMetrics {
    let positions: Vec<Vec2> = trace
        .iter()
        .map(|r| reference_from_pose(r.cmo_pose, cfg))
        .collect();
    let completion = metrics::completion_time_from_path(
        &positions,
        log.goal,
        cfg.sim.completion_tolerance,
        cfg.sim.hold_steps(),
        cfg.sim.dt,
    );
    let end = positions.last().copied().unwrap_or(log.start);
    TrialMetrics {
        set_index: log.set_index,
        task_index: log.task_index,
        task: log.task,
        completed: completion.is_some(),
        completion_time: completion.unwrap_or(positions.len() as f64 * cfg.sim.dt),
        scaled_path_length: metrics::scaled_path_length(&positions, log.start, end).ok(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAnalysis {
    pub dir: PathBuf,
    pub trials: Vec<TrialMetrics>,
    /// Trace files that were missing or unreadable.
    pub missing: Vec<String>,
    /// World-frame x velocity of the reference point over x-direction tasks.
    pub x_velocity: Option<Histogram>,
}

impl RunAnalysis {
    /// Completion times of finished trials.
    pub fn completion_times(&self) -> Vec<(Task, f64)> {
        self.trials
            .iter()
            .filter(|t| t.completed)
            .map(|t| (t.task, t.completion_time))
            .collect()
    }

    pub fn scaled_path_lengths(&self) -> Vec<(Task, f64)> {
        self.trials
            .iter()
            .filter(|t| t.completed)
            .filter_map(|t| t.scaled_path_length.map(|v| (t.task, v)))
            .collect()
    }

    pub fn unfinished(&self) -> usize {
        self.trials.iter().filter(|t| !t.completed).count()
    }
}

/// Reads `session.json` and every trace of a run directory.
pub fn analyze_run(dir: &Path) -> Result<RunAnalysis> {
    let log: SessionLog = io::read_session(dir)?;
    let root = if dir.is_dir() {
        dir.to_path_buf()
    } else {
        dir.parent().unwrap_or(Path::new(".")).to_path_buf()
    };
    let traces = root.join(io::TRACE_DIR);
    let mut trials = Vec::new();
    let mut missing = Vec::new();
    let mut vx = Vec::new();
    for t in log.trials() {
        match io::read_trace(&traces.join(&t.trace_file)) {
            Ok(trace) => {
                let m = trial_metrics(t, &trace, &log.config);
                if matches!(t.task, Task::XPos | Task::XNeg) {
                    let path: Vec<Vec2> = std::iter::once(t.start)
                        .chain(
                            trace
                                .iter()
                                .map(|r| reference_from_pose(r.cmo_pose, &log.config)),
                        )
                        .collect();
                    vx.extend(metrics::central_velocities(
                        &path,
                        log.config.sim.dt,
                        Axis::X,
                    ));
                }
                trials.push(m);
            }
            Err(e) => {
                log::warn!("{}: {e}", t.trace_file);
                missing.push(t.trace_file.clone());
            }
        }
    }
    let x_velocity = metrics::velocity_histogram(&vx, VELOCITY_BIN_WIDTH, VELOCITY_RANGE).ok();
    Ok(RunAnalysis {
        dir: dir.to_path_buf(),
        trials,
        missing,
        x_velocity,
    })
}
