//! Simulation and benchmark harness for leader-follower transport of a shared
//! rigid object by a human leader and a soft-arm mobile robot follower.
//!
//! The follower's base is driven by a displacement controller reading how far
//! the object has pushed the compliant arm from its neutral pose. Sessions of
//! eight-task sets are simulated with a scripted leader (or driven live through
//! [`session`]), and trial metrics are compared against published reference
//! statistics with Brunner-Munzel tests.

pub mod analysis;
pub mod arm;
pub mod base;
pub mod body;
pub mod config;
pub mod controller;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod leader;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod session;
pub mod sim;
pub mod stats;
pub mod tasks;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{Pose2, Vec2};
