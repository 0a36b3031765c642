//! Displacement-based velocity controller for the mobile base.
//!
//! The arm's end effector (or the object centre) is displaced from a neutral
//! position fixed in the base frame; the displacement beyond a deadband is
//! mapped proportionally to a base velocity command, which is then limited.
//! In rectangular mode deadband and limit act on each axis independently; in
//! circular mode they act on the vector norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadbandShape {
    #[default]
    Rectangular,
    Circular,
}

/// Point whose displacement drives the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePoint {
    /// The arm tip (object plate).
    EndEffector,
    #[default]
    CmoCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerParams {
    /// Proportional gain, 1/s.
    pub k_p: f64,
    /// Deadband half-width, m.
    pub deadband: f64,
    /// Velocity limit, m/s.
    pub v_max: f64,
    pub deadband_shape: DeadbandShape,
    pub reference_point: ReferencePoint,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            k_p: 1.0,
            deadband: 0.1,
            v_max: 0.5,
            deadband_shape: DeadbandShape::Rectangular,
            reference_point: ReferencePoint::CmoCenter,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_p > 0.0 && self.k_p.is_finite()) {
            return Err(Error::param("k_p", "must be positive"));
        }
        if !(self.deadband >= 0.0 && self.deadband.is_finite()) {
            return Err(Error::param("deadband", "must be non-negative"));
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(Error::param("v_max", "must be positive"));
        }
        Ok(())
    }
}

/// Neutral reference position of the controlled point in the base frame.
/// Captured once when a session is initialised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub p0: Vec2,
}

impl ControllerState {
    pub fn initialize(p0: Vec2) -> Self {
        Self { p0 }
    }
}

pub fn compute_displacement(p_t: Vec2, state: &ControllerState) -> Vec2 {
    p_t - state.p0
}

fn deadband_scalar(d: f64, deadband: f64) -> f64 {
    let mag = d.abs();
    if mag <= deadband {
        0.0
    } else {
        (mag - deadband).copysign(d)
    }
}

pub fn apply_deadband_rect(dp: Vec2, deadband: f64) -> Vec2 {
    dp.map(|d| deadband_scalar(d, deadband))
}

/// Radial shrink by `deadband`, preserving direction.
pub fn apply_deadband_circular(dp: Vec2, deadband: f64) -> Vec2 {
    let n = dp.norm();
    if n <= deadband {
        Vec2::ZERO
    } else {
        dp * ((n - deadband) / n)
    }
}

pub fn saturate(v: Vec2, v_max: f64, shape: DeadbandShape) -> Vec2 {
    match shape {
        DeadbandShape::Rectangular => v.map(|c| {
            if c.abs() <= v_max {
                c
            } else {
                v_max.copysign(c)
            }
        }),
        DeadbandShape::Circular => {
            let n = v.norm();
            if n <= v_max {
                v
            } else {
                v * (v_max / n)
            }
        }
    }
}

/// One controller update: displacement, deadband, gain, limit.
pub fn command_velocity(p_t: Vec2, state: &ControllerState, params: &ControllerParams) -> Vec2 {
    let dp = compute_displacement(p_t, state);
    let past = match params.deadband_shape {
        DeadbandShape::Rectangular => apply_deadband_rect(dp, params.deadband),
        DeadbandShape::Circular => apply_deadband_circular(dp, params.deadband),
    };
    saturate(past * params.k_p, params.v_max, params.deadband_shape)
}

/// True when `dp` lies inside the deadband region of the given shape.
pub fn inside_deadband(dp: Vec2, deadband: f64, shape: DeadbandShape) -> bool {
    match shape {
        DeadbandShape::Rectangular => dp.x.abs() <= deadband && dp.y.abs() <= deadband,
        DeadbandShape::Circular => dp.norm() <= deadband,
    }
}
