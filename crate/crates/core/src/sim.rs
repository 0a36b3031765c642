//! Coupled fixed-step simulation of leader, object, soft arm and base.
//!
//! Each step: the controller reads the reference-point displacement in the
//! base frame, the base tracks the resulting command, and the object is
//! advanced under the leader's grip force at the handle, the arm's passive
//! restoring force at the plate, and viscous damping. The object update is
//! linearly implicit in the arm spring and all damping terms; the leader force
//! is an explicit input.

use nalgebra::{Matrix2x3, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::arm::{endpoint_spring_from_config, restoring_force, EndpointSpring};
use crate::base::{track_velocity, BaseState};
use crate::body::{Attachment, CmoBody};
use crate::config::RunConfig;
use crate::controller::{command_velocity, compute_displacement, ControllerState, ReferencePoint};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::{Pose2, Vec2};
use crate::leader::{leader_force, leader_torque, ScriptedLeader, Wrench};
use crate::metrics;
use crate::rng::{substream, unit_f64, SimRng};
use crate::tasks::{enumerate_valid_sets, goal_sequence, sample_distinct_sets, Task, TaskSet};

/// Complete simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub cmo: CmoBody,
    pub base: BaseState,
    pub controller: ControllerState,
    /// Arm tip impedance; `neutral_point` is in world coordinates.
    pub spring: EndpointSpring,
    /// Neutral tip position in the base frame (homed arm).
    pub home_offset: Vec2,
    pub time: f64,
    pub steps: u64,
}

/// Reference point of the controller and of all metrics.
pub fn reference_point(cmo: &CmoBody, mode: ReferencePoint) -> Vec2 {
    match mode {
        ReferencePoint::CmoCenter => cmo.pose.position,
        ReferencePoint::EndEffector => cmo.attachment_world(Attachment::Plate),
    }
}

/// Reference point recovered from a logged object pose.
pub fn reference_from_pose(pose: Pose2, cfg: &RunConfig) -> Vec2 {
    match cfg.controller.reference_point {
        ReferencePoint::CmoCenter => pose.position,
        ReferencePoint::EndEffector => pose.transform_point(cfg.cmo.plate_offset),
    }
}

impl World {
    /// Base at the origin, arm homed, object plate at the arm's neutral point,
    /// controller neutral captured from this configuration.
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let local = endpoint_spring_from_config(&cfg.arm, &cfg.arm.home_bends())?;
        let home_offset = local.neutral_point;
        let base = BaseState::at(Pose2::default());
        let neutral = base.pose.transform_point(home_offset);
        let cmo_pose = Pose2::new(neutral - cfg.cmo.plate_offset, 0.0);
        let cmo = CmoBody::new(cfg.cmo, cmo_pose)?;
        let reference = reference_point(&cmo, cfg.controller.reference_point);
        let controller = ControllerState::initialize(base.pose.inverse_transform_point(reference));
        Ok(Self {
            cmo,
            base,
            controller,
            spring: EndpointSpring {
                neutral_point: neutral,
                ..local
            },
            home_offset,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn reference(&self, cfg: &RunConfig) -> Vec2 {
        reference_point(&self.cmo, cfg.controller.reference_point)
    }

    /// Displacement of the reference point from its neutral, base frame.
    pub fn displacement(&self, cfg: &RunConfig) -> Vec2 {
        let p = self.base.pose.inverse_transform_point(self.reference(cfg));
        compute_displacement(p, &self.controller)
    }

    /// Passive arm force currently acting on the plate.
    pub fn arm_force(&self) -> Vec2 {
        let plate = self.cmo.attachment_world(Attachment::Plate);
        let rel_vel = self.cmo.attachment_velocity(Attachment::Plate) - self.base.velocity;
        restoring_force(&self.spring, plate, rel_vel)
    }

    pub fn is_finite(&self) -> bool {
        self.cmo.is_finite()
            && self.base.pose.is_finite()
            && self.base.velocity.is_finite()
            && self.spring.neutral_point.is_finite()
    }

    /// Kinetic energy of the object plus potential energy of the arm spring.
    pub fn object_energy(&self) -> f64 {
        let d = self.cmo.attachment_world(Attachment::Plate) - self.spring.neutral_point;
        let potential =
            0.5 * (self.spring.stiffness.x * d.x * d.x + self.spring.stiffness.y * d.y * d.y);
        let kinetic = 0.5 * self.cmo.geometry.mass * self.cmo.velocity.norm_squared()
            + 0.5 * self.cmo.yaw_inertia * self.cmo.yaw_rate * self.cmo.yaw_rate;
        potential + kinetic
    }
}

/// One logged step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub cmo_pose: Pose2,
    pub base_pose: Pose2,
    pub displacement: Vec2,
    pub command: Vec2,
    pub leader_force: Vec2,
    pub arm_force: Vec2,
}

/// Advances the world by one step of `cfg.sim.dt`. `time_offset` sets the
/// record's time base (task-relative logging).
pub fn step(
    world: &World,
    leader: Wrench,
    cfg: &RunConfig,
    time_offset: f64,
) -> Result<(World, StepRecord)> {
    let dt = cfg.sim.dt;
    let mut next = world.clone();

    let displacement = world.displacement(cfg);
    let command_base = command_velocity(
        world
            .base
            .pose
            .inverse_transform_point(world.reference(cfg)),
        &world.controller,
        &cfg.controller,
    );
    let command = command_base.rotated(world.base.pose.heading);

    next.base = track_velocity(command, &world.base, &cfg.base, dt);
    next.spring.neutral_point = next.base.pose.transform_point(world.home_offset);

    let arm_force = next.arm_force();
    integrate_object(&mut next, leader, arm_force, cfg);

    next.steps = world.steps + 1;
    next.time = next.steps as f64 * dt;

    if !next.is_finite() {
        return Err(Error::SimulationFault {
            t: next.time,
            detail: format!("non-finite state: cmo={:?} base={:?}", next.cmo, next.base),
        });
    }
    debug_assert_eq!(
        next.spring.neutral_point,
        next.base.pose.transform_point(next.home_offset)
    );

    let record = StepRecord {
        t: next.time - time_offset,
        cmo_pose: next.cmo.pose,
        base_pose: next.base.pose,
        displacement,
        command,
        leader_force: leader.force,
        arm_force,
    };
    Ok((next, record))
}

/// Linearly implicit Euler update of the object:
/// `(M + h C + h^2 K) u' = M u + h F(q, u) + h C u`, then `q' = q + h u'`.
fn integrate_object(world: &mut World, leader: Wrench, arm_force: Vec2, cfg: &RunConfig) {
    let leader_force = leader.force;
    let h = cfg.sim.dt;
    let body = &world.cmo;
    let heading = body.pose.heading;
    let r_plate = body.geometry.plate_offset.rotated(heading);
    let r_handle = body.geometry.handle_offset.rotated(heading);
    let (ct, cr) = (cfg.sim.translational_damping, cfg.sim.rotational_damping);

    let u = Vector3::new(body.velocity.x, body.velocity.y, body.yaw_rate);
    let force = Vector3::new(
        arm_force.x + leader_force.x - ct * u.x,
        arm_force.y + leader_force.y - ct * u.y,
        r_plate.cross(arm_force) + r_handle.cross(leader_force) + leader.torque - cr * u.z,
    );

    let jac = Matrix2x3::new(1.0, 0.0, -r_plate.y, 0.0, 1.0, r_plate.x);
    let ks = nalgebra::Matrix2::from_diagonal(&nalgebra::Vector2::new(
        world.spring.stiffness.x,
        world.spring.stiffness.y,
    ));
    let cs = nalgebra::Matrix2::from_diagonal(&nalgebra::Vector2::new(
        world.spring.damping.x,
        world.spring.damping.y,
    ));
    let stiffness = jac.transpose() * ks * jac;
    let damping = jac.transpose() * cs * jac + Matrix3::from_diagonal(&Vector3::new(ct, ct, cr));
    let mass = Matrix3::from_diagonal(&Vector3::new(
        body.geometry.mass,
        body.geometry.mass,
        body.yaw_inertia,
    ));

    let lhs = mass + damping * h + stiffness * (h * h);
    let rhs = mass * u + force * h + damping * u * h;
    let u_next = lhs.lu().solve(&rhs).unwrap_or(u);

    let body = &mut world.cmo;
    body.velocity = Vec2::new(u_next.x, u_next.y);
    body.yaw_rate = u_next.z;
    body.pose = Pose2::new(
        body.pose.position + body.velocity * h,
        heading + body.yaw_rate * h,
    );
}

// ---------------------------------------------------------------------------
// Leaders

/// Grip wrench of a leader pulling the handle toward `target` while holding the heading.
pub fn grip_wrench(world: &World, target: Vec2, cfg: &RunConfig) -> Wrench {
    let handle = world.cmo.attachment_world(Attachment::Handle);
    let vel = world.cmo.attachment_velocity(Attachment::Handle);
    Wrench::new(
        leader_force(handle, vel, target, &cfg.leader),
        leader_torque(world.cmo.pose.heading, world.cmo.yaw_rate, &cfg.leader),
    )
}

/// Source of the leader's grip wrench.
pub trait Leader {
    /// Starts a move of the reference point from `start` to `goal`.
    fn begin_task(&mut self, _start: Vec2, _goal: Vec2, _duration_scale: f64) {}
    /// Keeps the last goal during a pause.
    fn hold(&mut self) {}
    /// Wrench on the handle at task time `t`.
    fn wrench(&mut self, t: f64, world: &World, cfg: &RunConfig) -> Wrench;
}

impl Leader for ScriptedLeader {
    fn begin_task(&mut self, start: Vec2, goal: Vec2, duration_scale: f64) {
        ScriptedLeader::begin_task(self, start, goal, duration_scale);
    }

    fn hold(&mut self) {
        ScriptedLeader::hold(self);
    }

    fn wrench(&mut self, t: f64, world: &World, cfg: &RunConfig) -> Wrench {
        let handle = world.cmo.attachment_world(Attachment::Handle);
        let target = self.handle_target(t, handle, world.reference(cfg), cfg.sim.dt);
        grip_wrench(world, target, cfg)
    }
}

/// Holds the handle at a fixed world target through the grip spring.
#[derive(Debug, Clone, Copy)]
pub struct FixedHandleTarget(pub Vec2);

impl Leader for FixedHandleTarget {
    fn wrench(&mut self, _t: f64, world: &World, cfg: &RunConfig) -> Wrench {
        grip_wrench(world, self.0, cfg)
    }
}

/// Applies nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoLeader;

impl Leader for NoLeader {
    fn wrench(&mut self, _t: f64, _world: &World, _cfg: &RunConfig) -> Wrench {
        Wrench::ZERO
    }
}

// ---------------------------------------------------------------------------
// Tasks, sets, sessions

/// Detects sustained goal alignment of the reference point.
#[derive(Debug, Clone)]
pub struct CompletionDetector {
    tolerance: f64,
    hold_steps: usize,
    dt: f64,
    consecutive: usize,
    steps: usize,
}

impl CompletionDetector {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tolerance: cfg.sim.completion_tolerance,
            hold_steps: cfg.sim.hold_steps(),
            dt: cfg.sim.dt,
            consecutive: 0,
            steps: 0,
        }
    }

    /// Feeds the reference position after one step; returns the completion
    /// time once alignment has been held for the hold duration.
    pub fn update(&mut self, reference: Vec2, goal: Vec2) -> Option<f64> {
        self.steps += 1;
        if (reference - goal).norm() <= self.tolerance {
            self.consecutive += 1;
        } else {
            self.consecutive = 0;
        }
        (self.consecutive >= self.hold_steps).then_some(self.steps as f64 * self.dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub task: Task,
    /// Reference point at task start.
    pub start: Vec2,
    pub goal: Vec2,
    pub trace: Vec<StepRecord>,
    /// Time to sustained alignment, or elapsed time at timeout.
    pub completion_time: f64,
    pub completed: bool,
}

impl TrialResult {
    /// Reference-point path from the task start through every logged step.
    pub fn reference_path(&self, cfg: &RunConfig) -> Vec<Vec2> {
        std::iter::once(self.start)
            .chain(
                self.trace
                    .iter()
                    .map(|r| reference_from_pose(r.cmo_pose, cfg)),
            )
            .collect()
    }

    pub fn end(&self, cfg: &RunConfig) -> Vec2 {
        self.trace
            .last()
            .map(|r| reference_from_pose(r.cmo_pose, cfg))
            .unwrap_or(self.start)
    }
}

/// Runs one task until sustained alignment with `goal` or timeout.
pub fn run_task(
    task: Task,
    goal: Vec2,
    world: &mut World,
    leader: &mut dyn Leader,
    cfg: &RunConfig,
    duration_scale: f64,
) -> Result<TrialResult> {
    let start = world.reference(cfg);
    leader.begin_task(start, goal, duration_scale);
    let dt = cfg.sim.dt;
    let max_steps = (cfg.sim.task_timeout / dt).round() as usize;
    let t0 = world.time;
    let mut detector = CompletionDetector::new(cfg);
    let mut trace = Vec::with_capacity(max_steps.min(4096));
    let mut completion = None;
    for k in 0..max_steps {
        let wrench = leader.wrench(k as f64 * dt, world, cfg);
        let (next, record) = step(world, wrench, cfg, t0)?;
        *world = next;
        trace.push(record);
        if let Some(t) = detector.update(world.reference(cfg), goal) {
            completion = Some(t);
            break;
        }
    }
    let completed = completion.is_some();
    Ok(TrialResult {
        task,
        start,
        goal,
        completion_time: completion.unwrap_or(max_steps as f64 * dt),
        completed,
        trace,
    })
}

/// Steps with the leader holding its last goal for `duration` seconds.
pub fn run_pause(
    world: &mut World,
    leader: &mut dyn Leader,
    cfg: &RunConfig,
    duration: f64,
) -> Result<()> {
    leader.hold();
    let steps = (duration / cfg.sim.dt).round() as usize;
    let t0 = world.time;
    for _ in 0..steps {
        let wrench = leader.wrench(f64::INFINITY, world, cfg);
        *world = step(world, wrench, cfg, t0)?.0;
    }
    Ok(())
}

/// Per-trial duration scale: uniform with mean 1 and relative SD `jitter`.
pub fn duration_scale(rng: &mut SimRng, jitter: f64) -> f64 {
    1.0 + jitter * 3f64.sqrt() * (2.0 * unit_f64(rng) - 1.0)
}

/// Runs all eight tasks of `set` from a fresh world, pausing between tasks.
pub fn run_set(set: &TaskSet, cfg: &RunConfig, rng: &mut SimRng) -> Result<Vec<TrialResult>> {
    let mut world = World::new(cfg)?;
    let mut leader = ScriptedLeader::new(cfg.leader);
    run_set_with(set, &mut world, &mut leader, cfg, rng)
}

pub fn run_set_with(
    set: &TaskSet,
    world: &mut World,
    leader: &mut dyn Leader,
    cfg: &RunConfig,
    rng: &mut SimRng,
) -> Result<Vec<TrialResult>> {
    let goals = goal_sequence(set, world.reference(cfg), cfg.sim.workspace_half_width)?;
    let mut results = Vec::with_capacity(goals.len());
    for (i, (task, goal)) in set.ordering.iter().zip(goals).enumerate() {
        let scale = duration_scale(rng, cfg.leader.duration_jitter);
        results.push(run_task(*task, goal, world, leader, cfg, scale)?);
        if i + 1 < set.ordering.len() {
            run_pause(world, leader, cfg, cfg.sim.pause_duration)?;
        }
    }
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub set_index: usize,
    pub task_index: usize,
    pub task: Task,
    pub start: Vec2,
    pub goal: Vec2,
    pub end: Vec2,
    pub completed: bool,
    pub completion_time: f64,
    pub scaled_path_length: Option<f64>,
    pub steps: usize,
    pub trace_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetLog {
    pub set_index: usize,
    pub ordering: TaskSet,
    pub trials: Vec<TrialLog>,
}

/// Everything needed to re-analyse a session alongside its trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub schema_version: u32,
    pub seed: u64,
    pub n_sets: usize,
    pub config: RunConfig,
    pub sets: Vec<SetLog>,
}

impl SessionLog {
    pub fn trials(&self) -> impl Iterator<Item = &TrialLog> {
        self.sets.iter().flat_map(|s| s.trials.iter())
    }
}

#[derive(Debug, Clone)]
pub struct SessionRun {
    pub log: SessionLog,
    /// `results[set][task]`
    pub results: Vec<Vec<TrialResult>>,
}

pub fn trace_file_name(set_index: usize, task_index: usize, task: Task) -> String {
    format!("set{set_index:02}_task{task_index}_{}.csv", task.code())
}

pub fn trial_log(
    set_index: usize,
    task_index: usize,
    trial: &TrialResult,
    cfg: &RunConfig,
) -> TrialLog {
    let path = trial.reference_path(cfg);
    let end = trial.end(cfg);
    TrialLog {
        set_index,
        task_index,
        task: trial.task,
        start: trial.start,
        goal: trial.goal,
        end,
        completed: trial.completed,
        completion_time: trial.completion_time,
        scaled_path_length: metrics::scaled_path_length(&path, trial.start, end).ok(),
        steps: trial.trace.len(),
        trace_file: trace_file_name(set_index, task_index, trial.task),
    }
}

/// Samples `cfg.n_sets` distinct valid sets from `cfg.seed` and runs them.
/// Sets are independent and may run in parallel; output order is by set index.
pub fn run_session(cfg: &RunConfig, exec: Execution) -> Result<SessionRun> {
    cfg.validate()?;
    let library = enumerate_valid_sets(cfg.sim.workspace_half_width)?;
    let sets = sample_distinct_sets(&library, cfg.n_sets, cfg.seed)?;
    let indexed: Vec<(usize, TaskSet)> = sets.into_iter().enumerate().collect();
    let outcomes = exec::map(&indexed, exec, |(i, set)| {
        let mut rng = substream(cfg.seed, *i as u64);
        run_set(set, cfg, &mut rng)
    });
    let mut results = Vec::with_capacity(outcomes.len());
    for r in outcomes {
        results.push(r?);
    }
    let sets = indexed
        .iter()
        .zip(&results)
        .map(|((i, set), trials)| SetLog {
            set_index: *i,
            ordering: set.clone(),
            trials: trials
                .iter()
                .enumerate()
                .map(|(j, t)| trial_log(*i, j, t, cfg))
                .collect(),
        })
        .collect();
    Ok(SessionRun {
        log: SessionLog {
            schema_version: crate::config::SCHEMA_VERSION,
            seed: cfg.seed,
            n_sets: cfg.n_sets,
            config: cfg.clone(),
            sets,
        },
        results,
    })
}
