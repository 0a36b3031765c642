//! Simulation and run configuration.

use serde::{Deserialize, Serialize};

use crate::arm::ArmConfig;
use crate::base::BaseParams;
use crate::body::CmoGeometry;
use crate::controller::ControllerParams;
use crate::error::{Error, Result};
use crate::leader::LeaderParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Physics and control step, s.
    pub dt: f64,
    /// Viscous damping on object translation, N s/m.
    pub translational_damping: f64,
    /// Viscous damping on object yaw, N m s.
    pub rotational_damping: f64,
    /// Half-width of the square workspace around the start node, m.
    pub workspace_half_width: f64,
    /// Goal alignment radius for the reference point, m.
    pub completion_tolerance: f64,
    /// Time alignment must be held, s.
    pub completion_hold: f64,
    /// Per-task time limit, s.
    pub task_timeout: f64,
    /// Pause between tasks of a set, s.
    pub pause_duration: f64,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            translational_damping: 15.0,
            rotational_damping: 3.0,
            workspace_half_width: 1.0,
            completion_tolerance: 0.05,
            completion_hold: 0.5,
            task_timeout: 60.0,
            pause_duration: 5.0,
            rng_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("workspace_half_width", self.workspace_half_width),
            ("completion_tolerance", self.completion_tolerance),
            ("task_timeout", self.task_timeout),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("translational_damping", self.translational_damping),
            ("rotational_damping", self.rotational_damping),
            ("completion_hold", self.completion_hold),
            ("pause_duration", self.pause_duration),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Number of consecutive aligned steps that make up the hold.
    pub fn hold_steps(&self) -> usize {
        ((self.completion_hold / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Every parameter bundle of a run. Loaded from JSON; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub controller: ControllerParams,
    pub arm: ArmConfig,
    pub base: BaseParams,
    pub leader: LeaderParams,
    pub sim: SimConfig,
    pub cmo: CmoGeometry,
    pub n_sets: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            controller: ControllerParams::default(),
            arm: ArmConfig::default(),
            base: BaseParams::default(),
            leader: LeaderParams::default(),
            sim: SimConfig::default(),
            cmo: CmoGeometry::default(),
            n_sets: 6,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::param(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        self.controller.validate()?;
        self.arm.validate()?;
        self.base.validate()?;
        self.leader.validate()?;
        self.sim.validate()?;
        self.cmo.validate()?;
        if self.n_sets == 0 {
            return Err(Error::param("n_sets", "must be at least 1"));
        }
        Ok(())
    }

    /// Parses and validates a JSON config. Parse errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
