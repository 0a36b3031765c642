//! Interactive session state machine driven by a remote leader.
//!
//! The owner feeds decoded client messages with [`Session::handle_message`]
//! and advances physics with [`Session::tick`], one fixed step per call.
//! Transport and pacing live outside this module.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::body::Attachment;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::io;
use crate::leader::Wrench;
use crate::sim::{
    self, CompletionDetector, SessionLog, SessionRun, SetLog, StepRecord, TrialResult, World,
};
use crate::tasks::{enumerate_valid_sets, goal_sequence, sample_set, TaskSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Countdown,
    TaskActive,
    Pause,
    SetComplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMsg {
    StartSet {
        seed: u64,
    },
    /// Handle target in world metres; `t` is the client clock in ms.
    LeaderInput {
        pos: Vec2,
        t: f64,
    },
    Abort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub task: crate::tasks::Task,
    pub completed: bool,
    pub completion_time: f64,
    pub scaled_path_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub seed: u64,
    pub ordering: TaskSet,
    pub trials: Vec<TrialSummary>,
    pub mean_completion_time: Option<f64>,
    pub mean_scaled_path_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMsg {
    State {
        phase: Phase,
        cmo: [f64; 3],
        goal: Option<Vec2>,
        base: Vec2,
        task_index: usize,
        elapsed: f64,
    },
    TaskComplete {
        task_index: usize,
        completed: bool,
        completion_time: f64,
        scaled_path_length: Option<f64>,
    },
    SetComplete {
        summary: SetSummary,
    },
    Error {
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionParams {
    /// Delay between `start_set` and the first task.
    pub countdown: f64,
    pub broadcast_hz: f64,
}

impl Default for SessionParams {
    fn default() -> Self {
        Self {
            countdown: 3.0,
            broadcast_hz: 30.0,
        }
    }
}

#[derive(Debug, Clone)]
struct ActiveSet {
    seed: u64,
    set: TaskSet,
    goals: Vec<Vec2>,
    results: Vec<TrialResult>,
}

#[derive(Debug, Clone)]
struct ActiveTask {
    start: Vec2,
    detector: CompletionDetector,
    trace: Vec<StepRecord>,
    t0: f64,
}

#[derive(Debug, Clone)]
pub struct Session {
    cfg: RunConfig,
    params: SessionParams,
    library: Vec<TaskSet>,
    world: World,
    phase: Phase,
    /// Phase to return to after a disconnect.
    suspended: Option<Phase>,
    phase_steps: usize,
    task_index: usize,
    set: Option<ActiveSet>,
    task: Option<ActiveTask>,
    /// Latest client handle target (zero-order hold).
    input: Option<Vec2>,
    /// Rate-limited target actually fed to the grip spring.
    target: Option<Vec2>,
    last_input_t: f64,
}

impl Session {
    pub fn new(cfg: RunConfig, params: SessionParams) -> Result<Self> {
        cfg.validate()?;
        if !(params.countdown >= 0.0 && params.broadcast_hz > 0.0) {
            return Err(Error::param(
                "session",
                "countdown must be >= 0 and broadcast_hz > 0",
            ));
        }
        let library = enumerate_valid_sets(cfg.sim.workspace_half_width)?;
        let world = World::new(&cfg)?;
        Ok(Self {
            cfg,
            params,
            library,
            world,
            phase: Phase::Idle,
            suspended: None,
            phase_steps: 0,
            task_index: 0,
            set: None,
            task: None,
            input: None,
            target: None,
            last_input_t: f64::NEG_INFINITY,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn params(&self) -> &SessionParams {
        &self.params
    }

    pub fn is_suspended(&self) -> bool {
        self.suspended.is_some()
    }

    pub fn current_goal(&self) -> Option<Vec2> {
        self.set
            .as_ref()
            .and_then(|s| s.goals.get(self.task_index).copied())
    }

    /// Decodes and applies one text frame. Malformed frames produce an error
    /// frame and leave the session untouched.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMsg> {
        match serde_json::from_str::<ClientMsg>(text) {
            Ok(msg) => self.handle_message(msg),
            Err(e) => vec![ServerMsg::Error {
                detail: format!("malformed message: {e}"),
            }],
        }
    }

    pub fn handle_message(&mut self, msg: ClientMsg) -> Vec<ServerMsg> {
        match msg {
            ClientMsg::StartSet { seed } => match self.start_set(seed) {
                Ok(()) => vec![self.snapshot()],
                Err(e) => vec![ServerMsg::Error {
                    detail: e.to_string(),
                }],
            },
            ClientMsg::LeaderInput { pos, t } => {
                if !pos.is_finite() || !t.is_finite() {
                    return vec![ServerMsg::Error {
                        detail: "leader_input fields must be finite".into(),
                    }];
                }
                if t < self.last_input_t {
                    return Vec::new();
                }
                self.last_input_t = t;
                self.input = Some(pos);
                if let Some(phase) = self.suspended.take() {
                    self.phase = phase;
                }
                Vec::new()
            }
            ClientMsg::Abort => {
                self.reset();
                vec![self.snapshot()]
            }
        }
    }

    /// Client went away: freeze the session in `idle` until the next input.
    pub fn disconnect(&mut self) {
        if matches!(
            self.phase,
            Phase::Countdown | Phase::TaskActive | Phase::Pause
        ) {
            self.suspended = Some(self.phase);
            self.phase = Phase::Idle;
        }
        self.input = None;
        self.last_input_t = f64::NEG_INFINITY;
    }

    fn reset(&mut self) {
        self.phase = Phase::Idle;
        self.suspended = None;
        self.set = None;
        self.task = None;
        self.task_index = 0;
        self.phase_steps = 0;
        self.input = None;
        self.target = None;
    }

    fn start_set(&mut self, seed: u64) -> Result<()> {
        let set = sample_set(&self.library, seed)?;
        self.reset();
        self.world = World::new(&self.cfg)?;
        let goals = goal_sequence(
            &set,
            self.world.reference(&self.cfg),
            self.cfg.sim.workspace_half_width,
        )?;
        self.set = Some(ActiveSet {
            seed,
            set,
            goals,
            results: Vec::new(),
        });
        self.enter(Phase::Countdown);
        Ok(())
    }

    fn enter(&mut self, phase: Phase) {
        self.phase = phase;
        self.phase_steps = 0;
        if phase == Phase::TaskActive {
            self.task = Some(ActiveTask {
                start: self.world.reference(&self.cfg),
                detector: CompletionDetector::new(&self.cfg),
                trace: Vec::new(),
                t0: self.world.time,
            });
        }
    }

    fn steps_for(&self, seconds: f64) -> usize {
        (seconds / self.cfg.sim.dt).round() as usize
    }

    fn grip_wrench(&mut self) -> Wrench {
        let handle = self.world.cmo.attachment_world(Attachment::Handle);
        let wanted = self.input.unwrap_or(handle);
        let step = self.cfg.leader.max_speed * self.cfg.sim.dt;
        let current = self.target.unwrap_or(handle);
        let delta = wanted - current;
        let n = delta.norm();
        let next = if n > step {
            current + delta * (step / n)
        } else {
            wanted
        };
        self.target = Some(next);
        sim::grip_wrench(&self.world, next, &self.cfg)
    }

    /// Advances one physics step. Idle and completed sessions do not step.
    pub fn tick(&mut self) -> Result<Vec<ServerMsg>> {
        if matches!(self.phase, Phase::Idle | Phase::SetComplete) {
            return Ok(Vec::new());
        }
        let wrench = self.grip_wrench();
        let t0 = self.task.as_ref().map_or(self.world.time, |t| t.t0);
        let (next, record) = sim::step(&self.world, wrench, &self.cfg, t0)?;
        self.world = next;
        self.phase_steps += 1;
        let mut out = Vec::new();
        match self.phase {
            Phase::Countdown => {
                if self.phase_steps >= self.steps_for(self.params.countdown) {
                    self.enter(Phase::TaskActive);
                }
            }
            Phase::Pause => {
                if self.phase_steps >= self.steps_for(self.cfg.sim.pause_duration) {
                    self.enter(Phase::TaskActive);
                }
            }
            Phase::TaskActive => {
                let goal = self.current_goal().expect("active task has a goal");
                let reference = self.world.reference(&self.cfg);
                let task = self.task.as_mut().expect("active task state");
                task.trace.push(record);
                let done = task.detector.update(reference, goal);
                let timed_out = self.phase_steps >= self.steps_for(self.cfg.sim.task_timeout);
                if done.is_some() || timed_out {
                    out.extend(self.finish_task(done));
                }
            }
            Phase::Idle | Phase::SetComplete => unreachable!(),
        }
        Ok(out)
    }

    fn finish_task(&mut self, completion: Option<f64>) -> Vec<ServerMsg> {
        let task = self.task.take().expect("active task state");
        let active = self.set.as_mut().expect("active set");
        let i = self.task_index;
        let trial = TrialResult {
            task: active.set.ordering[i],
            start: task.start,
            goal: active.goals[i],
            completion_time: completion.unwrap_or(task.trace.len() as f64 * self.cfg.sim.dt),
            completed: completion.is_some(),
            trace: task.trace,
        };
        let log = sim::trial_log(0, i, &trial, &self.cfg);
        active.results.push(trial);
        let mut out = vec![ServerMsg::TaskComplete {
            task_index: i,
            completed: log.completed,
            completion_time: log.completion_time,
            scaled_path_length: log.scaled_path_length,
        }];
        if i + 1 < active.set.ordering.len() {
            self.task_index += 1;
            self.enter(Phase::Pause);
        } else {
            self.phase = Phase::SetComplete;
            self.phase_steps = 0;
            out.push(ServerMsg::SetComplete {
                summary: self.summary().expect("set present"),
            });
        }
        out
    }

    pub fn snapshot(&self) -> ServerMsg {
        let p = self.world.cmo.pose;
        let elapsed = match self.phase {
            Phase::TaskActive => self
                .task
                .as_ref()
                .map_or(0.0, |t| t.trace.len() as f64 * self.cfg.sim.dt),
            _ => self.phase_steps as f64 * self.cfg.sim.dt,
        };
        ServerMsg::State {
            phase: self.phase,
            cmo: [p.position.x, p.position.y, p.heading],
            goal: self.current_goal(),
            base: self.world.base.pose.position,
            task_index: self.task_index,
            elapsed,
        }
    }

    /// Trial records of the current set so far.
    pub fn results(&self) -> &[TrialResult] {
        self.set.as_ref().map_or(&[], |s| &s.results)
    }

    pub fn summary(&self) -> Option<SetSummary> {
        let active = self.set.as_ref()?;
        let trials: Vec<TrialSummary> = active
            .results
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let log = sim::trial_log(0, i, r, &self.cfg);
                TrialSummary {
                    task: r.task,
                    completed: r.completed,
                    completion_time: r.completion_time,
                    scaled_path_length: log.scaled_path_length,
                }
            })
            .collect();
        let mean =
            |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        Some(SetSummary {
            seed: active.seed,
            ordering: active.set.clone(),
            mean_completion_time: mean(
                trials
                    .iter()
                    .filter(|t| t.completed)
                    .map(|t| t.completion_time)
                    .collect(),
            ),
            mean_scaled_path_length: mean(
                trials.iter().filter_map(|t| t.scaled_path_length).collect(),
            ),
            trials,
        })
    }

    /// Writes the finished trials of the current set in the batch layout.
    pub fn export(&self, dir: &Path) -> Result<()> {
        let active = self
            .set
            .as_ref()
            .ok_or_else(|| Error::Configuration("no set to export".into()))?;
        let trials = active
            .results
            .iter()
            .enumerate()
            .map(|(j, r)| sim::trial_log(0, j, r, &self.cfg))
            .collect();
        let run = SessionRun {
            log: SessionLog {
                schema_version: crate::config::SCHEMA_VERSION,
                seed: active.seed,
                n_sets: 1,
                config: self.cfg.clone(),
                sets: vec![SetLog {
                    set_index: 0,
                    ordering: active.set.clone(),
                    trials,
                }],
            },
            results: vec![active.results.clone()],
        };
        io::write_session(dir, &run)
    }
}
