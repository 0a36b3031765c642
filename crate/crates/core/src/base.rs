//! Holonomic mobile base: first-order velocity tracking with an acceleration
//! clamp, the study speed limit, and an optional castor-reorientation stall.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Pose2, Vec2};

/// Commands slower than this carry no direction.
const DIRECTION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaseParams {
    /// Platform capability, m/s.
    pub v_cap: f64,
    /// Speed limit used in the trials, m/s.
    pub v_study: f64,
    /// m/s^2
    pub accel_limit: f64,
    /// s
    pub tracking_time_constant: f64,
    pub castor_enabled: bool,
    /// Commanded direction change that triggers a reorientation, rad.
    pub castor_threshold: f64,
    /// Stall duration per reorientation, s.
    pub castor_stall: f64,
}

impl Default for BaseParams {
    fn default() -> Self {
        Self {
            v_cap: 5.0,
            v_study: 0.5,
            accel_limit: 1.5,
            tracking_time_constant: 0.15,
            castor_enabled: false,
            castor_threshold: std::f64::consts::FRAC_PI_3,
            castor_stall: 0.3,
        }
    }
}

impl BaseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_study > 0.0 && self.v_study <= self.v_cap && self.v_cap.is_finite()) {
            return Err(Error::param("v_study", "require 0 < v_study <= v_cap"));
        }
        if !(self.accel_limit > 0.0 && self.accel_limit.is_finite()) {
            return Err(Error::param("accel_limit", "must be positive"));
        }
        if !(self.tracking_time_constant > 0.0 && self.tracking_time_constant.is_finite()) {
            return Err(Error::param("tracking_time_constant", "must be positive"));
        }
        if !(self.castor_threshold >= 0.0 && self.castor_stall >= 0.0) {
            return Err(Error::param(
                "castor",
                "threshold and stall must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseState {
    pub pose: Pose2,
    pub velocity: Vec2,
    /// Direction of the last non-zero command, rad.
    pub last_command_direction: Option<f64>,
    /// Remaining castor stall, s.
    pub stall_remaining: f64,
}

impl BaseState {
    pub fn at(pose: Pose2) -> Self {
        Self {
            pose,
            ..Default::default()
        }
    }
}

fn clamp_norm(v: Vec2, max: f64) -> Vec2 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

/// Advances the base by one step of length `dt` under velocity command `cmd`
/// (expressed in the world frame; the base does not rotate).
pub fn track_velocity(cmd: Vec2, state: &BaseState, params: &BaseParams, dt: f64) -> BaseState {
    let mut next = *state;

    if cmd.norm() > DIRECTION_EPS {
        let dir = cmd.angle();
        if params.castor_enabled {
            if let Some(prev) = state.last_command_direction {
                if normalize_angle(dir - prev).abs() > params.castor_threshold {
                    next.stall_remaining = params.castor_stall;
                }
            }
        }
        next.last_command_direction = Some(dir);
    }

    if params.castor_enabled && next.stall_remaining > 0.5 * dt {
        next.stall_remaining = (next.stall_remaining - dt).max(0.0);
        next.velocity = Vec2::ZERO;
        return next;
    }
    next.stall_remaining = 0.0;

    let target = clamp_norm(cmd, params.v_study.min(params.v_cap));
    let alpha = 1.0 - (-dt / params.tracking_time_constant).exp();
    let dv = clamp_norm((target - state.velocity) * alpha, params.accel_limit * dt);
    next.velocity = clamp_norm(state.velocity + dv, params.v_cap);
    next.pose = Pose2::new(state.pose.position + next.velocity * dt, state.pose.heading);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rest_is_fixed_point() {
        let s = BaseState::default();
        let n = track_velocity(Vec2::ZERO, &s, &BaseParams::default(), 0.01);
        assert_eq!(n.velocity, Vec2::ZERO);
        assert_eq!(n.pose, s.pose);
    }

    #[test]
    fn step_response_matches_first_order_lag() {
        let params = BaseParams {
            accel_limit: 100.0,
            ..Default::default()
        };
        let dt = 0.01;
        let cmd = Vec2::new(0.3, 0.0);
        let mut s = BaseState::default();
        for k in 1..=200 {
            s = track_velocity(cmd, &s, &params, dt);
            let t = k as f64 * dt;
            let expected = 0.3 * (1.0 - (-t / params.tracking_time_constant).exp());
            assert_abs_diff_eq!(s.velocity.x, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn study_limit_applies_to_speed() {
        let params = BaseParams::default();
        let mut s = BaseState::default();
        for _ in 0..1000 {
            s = track_velocity(Vec2::new(0.5, 0.5), &s, &params, 0.01);
        }
        assert_abs_diff_eq!(s.velocity.norm(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn acceleration_is_clamped() {
        let params = BaseParams::default();
        let s = track_velocity(Vec2::new(0.5, 0.0), &BaseState::default(), &params, 0.01);
        assert!(s.velocity.norm() <= params.accel_limit * 0.01 + 1e-15);
    }

    #[test]
    fn direction_flip_stalls_for_configured_window() {
        let params = BaseParams {
            castor_enabled: true,
            accel_limit: 100.0,
            ..Default::default()
        };
        let dt = 0.01;
        let mut s = BaseState::default();
        for _ in 0..100 {
            s = track_velocity(Vec2::new(0.3, 0.0), &s, &params, dt);
        }
        assert!(s.velocity.x > 0.29);
        let stall_steps = (params.castor_stall / dt).round() as usize;
        let flip = Vec2::new(-0.3, 0.0);
        let before = s.pose;
        for _ in 0..stall_steps {
            s = track_velocity(flip, &s, &params, dt);
            assert_eq!(s.velocity, Vec2::ZERO);
            assert_eq!(s.pose, before);
        }
        // Lag response resumes from rest on the next step.
        s = track_velocity(flip, &s, &params, dt);
        let expected = -0.3 * (1.0 - (-dt / params.tracking_time_constant).exp());
        assert_abs_diff_eq!(s.velocity.x, expected, epsilon = 1e-12);
    }
}
