//! Robot-tracker hand-eye calibration (`AX = YB`) and actual-pose recovery.
//!
//! With `A = base_T_gripper` from forward kinematics and `B = tracker_T_marker`
//! from the tracker, the unknowns are `X = gripper_T_marker` and
//! `Y = base_T_tracker`, related by `A X = Y B` for every observation.
//!
//! The solver is separable and closed form:
//!
//! 1. Rotations: `R_A R_X = R_Y R_B` is linear in `vec(R_X), vec(R_Y)` via
//!    Kronecker products. The 18-vector spanning the null space of the stacked
//!    system is the right singular vector of the smallest singular value. It
//!    is rescaled to unit determinant and each 3x3 block is projected onto
//!    SO(3).
//! 2. Translations: with rotations fixed, `R_A t_X - t_Y = R_Y t_B - t_A` is
//!    an ordinary linear least-squares problem in `(t_X, t_Y)`.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::pose::{nearest_rotation, rotation_error, translation_error, Pose};

pub const DEFAULT_MIN_OBSERVATIONS: usize = 10;

/// Minimum angle between two relative-rotation axes for the rotation part to
/// be observable.
pub const MIN_AXIS_SPREAD_DEG: f64 = 15.0;

/// Relative rotations smaller than this carry no usable axis information.
const MIN_RELATIVE_ANGLE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerObservation {
    /// `base_T_gripper`, forward kinematics of the measured joints.
    pub robot_gripper: Pose,
    /// `tracker_T_marker` as reported by the tracker.
    pub tracker_marker: Pose,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandEyeSolution {
    /// `gripper_T_marker`.
    pub gripper_marker: Pose,
    /// `tracker_T_base`.
    pub tracker_robot: Pose,
    /// RMS rotation mismatch of `A X` vs `Y B`, radians.
    pub residual_rot: f64,
    /// RMS translation mismatch of `A X` vs `Y B`, meters.
    pub residual_trans: f64,
}

impl HandEyeSolution {
    pub fn identity() -> Self {
        Self {
            gripper_marker: Pose::identity(),
            tracker_robot: Pose::identity(),
            residual_rot: 0.0,
            residual_trans: 0.0,
        }
    }

    pub fn new(gripper_marker: Pose, tracker_robot: Pose) -> Self {
        Self {
            gripper_marker,
            tracker_robot,
            residual_rot: 0.0,
            residual_trans: 0.0,
        }
    }

    /// Marker pose the tracker would report for a gripper at `base_T_gripper`.
    pub fn predict_tracker_marker(&self, base_gripper: &Pose) -> Pose {
        self.tracker_robot * *base_gripper * self.gripper_marker
    }
}

/// `A = base_T_tracker * tracker_T_marker * marker_T_gripper`.
pub fn compute_actual_pose(solution: &HandEyeSolution, tracker_marker: &Pose) -> Pose {
    solution.tracker_robot.inverse() * *tracker_marker * solution.gripper_marker.inverse()
}

/// Checks that the robot-side rotations span at least two distinct axes.
fn check_rotation_diversity(observations: &[MarkerObservation]) -> Result<()> {
    let r0t = observations[0].robot_gripper.rotation.transpose();
    let mut axes: Vec<(f64, Vector3<f64>)> = observations[1..]
        .iter()
        .filter_map(|o| {
            let rel = Pose::from_rotation(r0t * o.robot_gripper.rotation);
            let w = rel.rotation_vector();
            let angle = w.norm();
            (angle > MIN_RELATIVE_ANGLE).then(|| (angle, w / angle))
        })
        .collect();
    if axes.is_empty() {
        return Err(Error::DegenerateMotion(
            "no relative rotation between observations".into(),
        ));
    }
    axes.sort_by(|a, b| b.0.total_cmp(&a.0));
    let reference = axes[0].1;
    let spread = axes[1..]
        .iter()
        .map(|(_, axis)| axis.dot(&reference).abs().min(1.0).acos())
        .fold(0.0, f64::max);
    if spread.to_degrees() <= MIN_AXIS_SPREAD_DEG {
        return Err(Error::DegenerateMotion(format!(
            "relative rotation axes span only {:.3} deg (need > {MIN_AXIS_SPREAD_DEG} deg)",
            spread.to_degrees()
        )));
    }
    Ok(())
}

/// Solves `A X = Y B` over all observations in the least-squares sense.
pub fn solve_hand_eye(observations: &[MarkerObservation], min_count: usize) -> Result<HandEyeSolution> {
    let need = min_count.max(2);
    if observations.len() < need {
        return Err(Error::TooFewObservations {
            got: observations.len(),
            need,
        });
    }
    for (i, o) in observations.iter().enumerate() {
        o.robot_gripper
            .validate()
            .and_then(|_| o.tracker_marker.validate())
            .map_err(|e| e.at_step(i))?;
    }
    check_rotation_diversity(observations)?;

    // Each observation contributes 9 rows [I (x) R_A, -(R_B^T (x) I)]; only the
    // 18x18 normal matrix is accumulated.
    let mut normal = SMatrix::<f64, 18, 18>::zeros();
    for o in observations {
        let ra = o.robot_gripper.rotation;
        let rb = o.tracker_marker.rotation;
        let mut rows = SMatrix::<f64, 9, 18>::zeros();
        let i3 = Matrix3::<f64>::identity();
        rows.fixed_view_mut::<9, 9>(0, 0).copy_from(&i3.kronecker(&ra));
        rows.fixed_view_mut::<9, 9>(0, 9).copy_from(&(-rb.transpose().kronecker(&i3)));
        normal += rows.transpose() * rows;
    }
    let svd = normal.svd(false, true);
    let v_t = svd.v_t.expect("svd v_t");
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    let v: SVector<f64, 18> = v_t.row(smallest).transpose();
    let mut rx = Matrix3::from_column_slice(&v.as_slice()[0..9]);
    let mut ry = Matrix3::from_column_slice(&v.as_slice()[9..18]);
    let det = rx.determinant();
    let scale = det.signum() * det.abs().cbrt();
    if !scale.is_finite() || scale.abs() < 1e-12 {
        return Err(Error::DegenerateMotion("rotation null space is degenerate".into()));
    }
    rx /= scale;
    ry /= scale;
    let rx = nearest_rotation(&rx);
    let ry = nearest_rotation(&ry);

    // R_A t_X - t_Y = R_Y t_B - t_A
    let mut ata = SMatrix::<f64, 6, 6>::zeros();
    let mut atb = SVector::<f64, 6>::zeros();
    for o in observations {
        let ra = o.robot_gripper.rotation;
        let mut a = SMatrix::<f64, 3, 6>::zeros();
        a.fixed_view_mut::<3, 3>(0, 0).copy_from(&ra);
        a.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-Matrix3::identity()));
        let b = ry * o.tracker_marker.translation - o.robot_gripper.translation;
        ata += a.transpose() * a;
        atb += a.transpose() * b;
    }
    let t = ata
        .cholesky()
        .map(|c| c.solve(&atb))
        .ok_or_else(|| Error::DegenerateMotion("translation system is singular".into()))?;

    let x = Pose::new_unchecked(rx, Vector3::new(t[0], t[1], t[2]));
    let y = Pose::new_unchecked(ry, Vector3::new(t[3], t[4], t[5]));

    let n = observations.len() as f64;
    let (mut sum_r, mut sum_t) = (0.0, 0.0);
    for o in observations {
        let lhs = o.robot_gripper * x;
        let rhs = y * o.tracker_marker;
        sum_r += rotation_error(&lhs, &rhs).powi(2);
        sum_t += translation_error(&lhs, &rhs).powi(2);
    }

    Ok(HandEyeSolution {
        gripper_marker: x,
        tracker_robot: y.inverse(),
        residual_rot: (sum_r / n).sqrt(),
        residual_trans: (sum_t / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> HandEyeSolution {
        HandEyeSolution::new(
            Pose::from_axis_angle(Vector3::new(0.1, -0.3, 0.2), Vector3::new(0.02, -0.01, 0.035)),
            Pose::from_axis_angle(Vector3::new(-0.4, 1.2, 0.3), Vector3::new(0.3, -0.1, 0.95)),
        )
    }

    fn observations(truth: &HandEyeSolution, gripper_poses: &[Pose]) -> Vec<MarkerObservation> {
        gripper_poses
            .iter()
            .map(|g| MarkerObservation {
                robot_gripper: *g,
                tracker_marker: truth.predict_tracker_marker(g),
            })
            .collect()
    }

    fn diverse_poses(n: usize) -> Vec<Pose> {
        (0..n)
            .map(|i| {
                let f = i as f64;
                Pose::from_axis_angle(
                    Vector3::new((0.7 * f).sin(), (1.3 * f).cos(), 0.5 * (0.4 * f).sin()) * 0.8,
                    Vector3::new(0.05 * (0.9 * f).cos(), 0.04 * f.sin(), -0.1 - 0.01 * f),
                )
            })
            .collect()
    }

    #[test]
    fn actual_pose_with_identity_solution() {
        let p = Pose::from_axis_angle(Vector3::new(0.2, 0.1, -0.3), Vector3::new(1.0, 2.0, 3.0));
        let a = compute_actual_pose(&HandEyeSolution::identity(), &p);
        assert!(translation_error(&a, &p) < 1e-15 && rotation_error(&a, &p) < 1e-7);
    }

    #[test]
    fn actual_pose_inverts_chain() {
        let sol = truth();
        for g in diverse_poses(5) {
            let a = compute_actual_pose(&sol, &sol.predict_tracker_marker(&g));
            assert!(translation_error(&a, &g) < 1e-14);
            assert!((a.rotation - g.rotation).norm() < 1e-14);
        }
    }

    #[test]
    fn recovers_noiseless_truth() {
        let t = truth();
        let sol = solve_hand_eye(&observations(&t, &diverse_poses(20)), 10).unwrap();
        assert!(rotation_error(&sol.gripper_marker, &t.gripper_marker) < 1e-10);
        assert!(translation_error(&sol.gripper_marker, &t.gripper_marker) < 1e-10);
        assert!(rotation_error(&sol.tracker_robot, &t.tracker_robot) < 1e-10);
        assert!(translation_error(&sol.tracker_robot, &t.tracker_robot) < 1e-10);
        assert!(sol.residual_rot < 1e-9 && sol.residual_trans < 1e-9);
    }

    #[test]
    fn too_few_observations() {
        let obs = observations(&truth(), &diverse_poses(5));
        match solve_hand_eye(&obs, 10) {
            Err(Error::TooFewObservations { got: 5, need: 10 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_axis_motion_is_degenerate() {
        let poses: Vec<Pose> = (0..15)
            .map(|i| {
                let mut p = Pose::rot_z(0.2 * i as f64);
                p.translation = Vector3::new(0.01 * i as f64, 0.0, 0.1);
                p
            })
            .collect();
        match solve_hand_eye(&observations(&truth(), &poses), 10) {
            Err(Error::DegenerateMotion(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn static_robot_is_degenerate() {
        let poses = vec![Pose::rot_x(0.3); 12];
        assert!(matches!(
            solve_hand_eye(&observations(&truth(), &poses), 10),
            Err(Error::DegenerateMotion(_))
        ));
    }
}
