//! Simulation and tuning toolkit for a two-axis telescope mount.
//!
//! The mount is modeled as a coupled two-link rigid body driven through a
//! computed-torque compensator. Four controllers close the loop: PD, a
//! Mamdani fuzzy controller, and genetic-algorithm-tuned versions of both.

pub mod controllers;
pub mod error;
pub mod fuzzy;
pub mod ga;
pub mod harness;
pub mod ini;
pub mod integrator;
pub mod metrics;
pub mod plant;

pub use error::{Error, Result};
