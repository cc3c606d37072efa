//! SE(3) pose algebra, DH forward/inverse kinematics and pose-error metrics.

pub mod dh;
pub mod ik;
pub mod pose;

pub use dh::{forward_kinematics, DhRow, DhTable, JointConfig, JointKind, DOF};
pub use ik::{inverse_kinematics, jacobian, joint_difference, wrap_angle, IkOptions};
pub use pose::{compose, inverse, nearest_rotation, rotation_error, translation_error, Pose};
