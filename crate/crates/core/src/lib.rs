//! Learning-based error injection for simulated robots.
//!
//! A pair of small neural networks learns a robot's controller error
//! (setpoint to measured joints) and its kinematic plus non-kinematic error
//! (measured to actual joints). Their predictions are injected into an ideal
//! simulated robot so that its pose errors follow the physical robot's
//! distribution. A configurable synthetic physical twin stands in for the
//! hardware as the ground-truth data source.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod learning;
pub mod phystwin;
pub mod pipeline;

pub use error::{Error, Result};
