//! Scripted stand-ins for the human leader.
//!
//! A leader plans a path for the object's reference point from the task start
//! to the goal and pulls on the handle through a grip spring. After the plan
//! has arrived, a slow integral correction on the remaining reference-point
//! error plays the role of the human's visual fine alignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderPolicy {
    #[default]
    MinJerk,
    Proportional,
    /// Diagonals split into an x leg followed by a y leg.
    Decomposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LeaderParams {
    pub policy: LeaderPolicy,
    /// Min-jerk duration for moves along the object's long axis (x), s.
    pub x_duration: f64,
    /// Min-jerk duration for lateral moves (y), s.
    pub y_duration: f64,
    /// Min-jerk duration for diagonal tasks, s.
    pub diagonal_duration: f64,
    /// Proportional policy rate, 1/s.
    pub gain: f64,
    /// Limit on how fast the handle target may move, m/s.
    pub max_speed: f64,
    /// N/m
    pub grip_stiffness: f64,
    /// N s/m
    pub grip_damping: f64,
    /// Torsional grip holding the object's initial heading, N m/rad.
    pub grip_torsion_stiffness: f64,
    /// N m s/rad
    pub grip_torsion_damping: f64,
    /// Relative standard deviation of per-trial duration scaling.
    pub duration_jitter: f64,
    /// Integral rate of the final-alignment correction, 1/s.
    pub correction_gain: f64,
    /// Bound on the accumulated correction, m.
    pub correction_limit: f64,
}

impl Default for LeaderParams {
    fn default() -> Self {
        Self {
            policy: LeaderPolicy::MinJerk,
            // Pooled HSR means per direction: 5.05 s (x), 6.06 s (y), 7.00 s (diagonal).
            x_duration: 5.0,
            y_duration: 6.0,
            diagonal_duration: 7.0,
            gain: 1.0,
            max_speed: 1.0,
            grip_stiffness: 400.0,
            grip_damping: 40.0,
            grip_torsion_stiffness: 400.0,
            grip_torsion_damping: 40.0,
            duration_jitter: 0.2,
            correction_gain: 2.0,
            correction_limit: 0.3,
        }
    }
}

impl LeaderParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("x_duration", self.x_duration),
            ("y_duration", self.y_duration),
            ("diagonal_duration", self.diagonal_duration),
            ("gain", self.gain),
            ("max_speed", self.max_speed),
            ("grip_stiffness", self.grip_stiffness),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        let non_negative = [
            ("grip_damping", self.grip_damping),
            ("grip_torsion_stiffness", self.grip_torsion_stiffness),
            ("grip_torsion_damping", self.grip_torsion_damping),
            ("duration_jitter", self.duration_jitter),
            ("correction_gain", self.correction_gain),
            ("correction_limit", self.correction_limit),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Nominal duration for a move from `start` to `goal`.
    pub fn nominal_duration(&self, start: Vec2, goal: Vec2) -> f64 {
        let d = goal - start;
        if is_diagonal(d) {
            self.diagonal_duration
        } else if d.x.abs() >= d.y.abs() {
            self.x_duration
        } else {
            self.y_duration
        }
    }
}

fn is_diagonal(d: Vec2) -> bool {
    let (ax, ay) = (d.x.abs(), d.y.abs());
    ax.min(ay) > 0.25 * ax.max(ay)
}

/// Quintic min-jerk progress `10 s^3 - 15 s^4 + 6 s^5`, clamped to `[0, 1]`.
pub fn min_jerk_progress(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

fn planned_position(t: f64, start: Vec2, goal: Vec2, params: &LeaderParams, duration: f64) -> Vec2 {
    let d = goal - start;
    match params.policy {
        LeaderPolicy::MinJerk => start + d * min_jerk_progress(t / duration),
        LeaderPolicy::Proportional => start + d * (1.0 - (-params.gain * t).exp()),
        LeaderPolicy::Decomposed if is_diagonal(d) => {
            let half = 0.5 * duration;
            let x = min_jerk_progress(t / half);
            let y = min_jerk_progress((t - half) / half);
            start + Vec2::new(d.x * x, d.y * y)
        }
        LeaderPolicy::Decomposed => start + d * min_jerk_progress(t / duration),
    }
}

/// Planned reference-point position `t` seconds after task start.
pub fn leader_target(t: f64, start: Vec2, goal: Vec2, params: &LeaderParams) -> Vec2 {
    planned_position(t, start, goal, params, params.nominal_duration(start, goal))
}

/// Grip spring force applied at the handle.
pub fn leader_force(
    handle_pos: Vec2,
    handle_vel: Vec2,
    target: Vec2,
    params: &LeaderParams,
) -> Vec2 {
    (target - handle_pos) * params.grip_stiffness - handle_vel * params.grip_damping
}

/// Force and yaw torque the leader applies at the handle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub force: Vec2,
    pub torque: f64,
}

impl Wrench {
    pub const ZERO: Wrench = Wrench {
        force: Vec2::ZERO,
        torque: 0.0,
    };

    pub fn new(force: Vec2, torque: f64) -> Self {
        Self { force, torque }
    }
}

/// Torsional grip torque pulling the object heading back to zero.
pub fn leader_torque(heading: f64, yaw_rate: f64, params: &LeaderParams) -> f64 {
    -params.grip_torsion_stiffness * crate::geometry::normalize_angle(heading)
        - params.grip_torsion_damping * yaw_rate
}

/// Stateful scripted leader for one task (the correction carries across tasks).
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedLeader {
    params: LeaderParams,
    start: Vec2,
    goal: Vec2,
    duration: f64,
    correction: Vec2,
    last_target: Option<Vec2>,
}

impl ScriptedLeader {
    pub fn new(params: LeaderParams) -> Self {
        Self {
            params,
            start: Vec2::ZERO,
            goal: Vec2::ZERO,
            duration: params.x_duration,
            correction: Vec2::ZERO,
            last_target: None,
        }
    }

    /// Begins a new move; `duration_scale` multiplies the nominal duration.
    pub fn begin_task(&mut self, start: Vec2, goal: Vec2, duration_scale: f64) {
        self.start = start;
        self.goal = goal;
        self.duration = self.params.nominal_duration(start, goal) * duration_scale;
    }

    /// Holds the current goal (used during pauses).
    pub fn hold(&mut self) {
        self.start = self.goal;
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn plan(&self, t: f64) -> Vec2 {
        planned_position(t, self.start, self.goal, &self.params, self.duration)
    }

    /// Handle target for the current step.
    pub fn handle_target(&mut self, t: f64, handle: Vec2, reference: Vec2, dt: f64) -> Vec2 {
        let plan = self.plan(t);
        if t >= self.duration && self.params.correction_gain > 0.0 {
            self.correction += (plan - reference) * (self.params.correction_gain * dt);
            let n = self.correction.norm();
            if n > self.params.correction_limit {
                self.correction = self.correction * (self.params.correction_limit / n);
            }
        }
        let mut target = plan + (handle - reference) + self.correction;
        if let Some(last) = self.last_target {
            let step = target - last;
            let max_step = self.params.max_speed * dt;
            if step.norm() > max_step {
                target = last + step * (max_step / step.norm());
            }
        }
        self.last_target = Some(target);
        target
    }
}
