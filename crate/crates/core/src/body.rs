//! The carried object: a planar rigid plate held at one end by the leader
//! (handle) and at the other by the soft arm (plate).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose2, Vec2};

pub const CMO_LENGTH: f64 = 1.37;
pub const CMO_WIDTH: f64 = 0.55;
pub const CMO_MASS: f64 = 11.0;

/// Yaw moment of inertia of a uniform rectangular plate, `m (L^2 + W^2) / 12`.
pub fn rect_yaw_inertia(mass: f64, length: f64, width: f64) -> Result<f64> {
    for (name, v) in [("mass", mass), ("length", length), ("width", width)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(
                name,
                format!("must be positive and finite, got {v}"),
            ));
        }
    }
    Ok(mass * (length * length + width * width) / 12.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    /// Human (leader) end.
    Handle,
    /// Robot end, rigidly fixed to the arm tip.
    Plate,
}

/// Body-frame geometry and mass properties; the long axis is body x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CmoGeometry {
    pub length: f64,
    pub width: f64,
    pub mass: f64,
    pub handle_offset: Vec2,
    pub plate_offset: Vec2,
}

impl Default for CmoGeometry {
    fn default() -> Self {
        Self {
            length: CMO_LENGTH,
            width: CMO_WIDTH,
            mass: CMO_MASS,
            handle_offset: Vec2::new(CMO_LENGTH / 2.0, 0.0),
            plate_offset: Vec2::new(-CMO_LENGTH / 2.0, 0.0),
        }
    }
}

impl CmoGeometry {
    pub fn validate(&self) -> Result<()> {
        rect_yaw_inertia(self.mass, self.length, self.width)?;
        if !(self.handle_offset.is_finite() && self.plate_offset.is_finite()) {
            return Err(Error::param("cmo offsets", "must be finite"));
        }
        // Opposite ends along the long axis.
        if self.handle_offset.x * self.plate_offset.x >= 0.0 {
            return Err(Error::param(
                "cmo offsets",
                "handle and plate must lie on opposite ends of the long axis",
            ));
        }
        Ok(())
    }
}

/// The co-manipulation object as a planar rigid body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmoBody {
    pub geometry: CmoGeometry,
    pub yaw_inertia: f64,
    pub pose: Pose2,
    pub velocity: Vec2,
    pub yaw_rate: f64,
}

impl CmoBody {
    pub fn new(geometry: CmoGeometry, pose: Pose2) -> Result<Self> {
        geometry.validate()?;
        let yaw_inertia = rect_yaw_inertia(geometry.mass, geometry.length, geometry.width)?;
        Ok(Self {
            geometry,
            yaw_inertia,
            pose,
            velocity: Vec2::ZERO,
            yaw_rate: 0.0,
        })
    }

    pub fn offset(&self, which: Attachment) -> Vec2 {
        match which {
            Attachment::Handle => self.geometry.handle_offset,
            Attachment::Plate => self.geometry.plate_offset,
        }
    }

    /// World position of an attachment point.
    pub fn attachment_world(&self, which: Attachment) -> Vec2 {
        self.pose.transform_point(self.offset(which))
    }

    /// World velocity of an attachment point.
    pub fn attachment_velocity(&self, which: Attachment) -> Vec2 {
        let r = self.offset(which).rotated(self.pose.heading);
        self.velocity + r.perp() * self.yaw_rate
    }

    pub fn is_finite(&self) -> bool {
        self.pose.is_finite() && self.velocity.is_finite() && self.yaw_rate.is_finite()
    }
}
