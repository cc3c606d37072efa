//! Damped least-squares inverse kinematics.

use nalgebra::{SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::dh::{DhTable, JointConfig, JointKind, DOF};
use super::pose::{rotation_log, Pose};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IkOptions {
    pub max_iter: usize,
    /// Levenberg damping added to the diagonal of `J'J`.
    pub damping: f64,
    pub tol_pos: f64,
    pub tol_rot: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            damping: 1e-4,
            tol_pos: 1e-8,
            tol_rot: 1e-8,
        }
    }
}

type Jacobian = SMatrix<f64, 6, DOF>;

/// Geometric Jacobian at `q`: rows 0..3 linear velocity, rows 3..6 angular
/// velocity, both in the base frame.
pub fn jacobian(dh: &DhTable, q: &JointConfig) -> Jacobian {
    let frames = dh.frames(q);
    let tip = frames[DOF].translation;
    let mut j = Jacobian::zeros();
    for i in 0..DOF {
        let frame = &frames[i + 1];
        let axis: Vector3<f64> = frame.rotation.column(2).into_owned();
        match dh.kind(i) {
            JointKind::Revolute => {
                let lin = axis.cross(&(tip - frame.translation));
                j.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
                j.fixed_view_mut::<3, 1>(3, i).copy_from(&axis);
            }
            JointKind::Prismatic => {
                j.fixed_view_mut::<3, 1>(0, i).copy_from(&axis);
            }
        }
    }
    j
}

/// Pose residual `(target - current)`: translation difference and the
/// axis-angle vector of `R_target R_current^T`, in the base frame.
fn residual(target: &Pose, current: &Pose) -> SVector<f64, 6> {
    let dp = target.translation - current.translation;
    let dr = rotation_log(&(target.rotation * current.rotation.transpose()));
    SVector::<f64, 6>::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Joint difference `a - b`, with revolute entries wrapped to `(-pi, pi]`.
pub fn joint_difference(dh: &DhTable, a: &JointConfig, b: &JointConfig) -> JointConfig {
    JointConfig(std::array::from_fn(|i| match dh.kind(i) {
        JointKind::Revolute => wrap_angle(a[i] - b[i]),
        JointKind::Prismatic => a[i] - b[i],
    }))
}

/// Solves for joints reaching `target`, iterating from `seed` and staying
/// inside the joint limits. The solution is the local branch around the seed.
pub fn inverse_kinematics(
    dh: &DhTable,
    target: &Pose,
    seed: &JointConfig,
    opts: &IkOptions,
) -> Result<JointConfig> {
    dh.check_limits(seed)?;
    let mut q = *seed;
    let mut err = residual(target, &dh.forward_unchecked(&q));
    let mut iterations = 0;
    // Iterate past the acceptance tolerance until the residual stalls so the
    // joint-space answer is as tight as the conditioning allows.
    let fine = 1e-3 * opts.tol_pos.min(opts.tol_rot);
    while iterations < opts.max_iter {
        let (ep, er) = split_norms(&err);
        if ep < fine && er < fine {
            break;
        }
        iterations += 1;
        let j = jacobian(dh, &q);
        let jt = j.transpose();
        let mut lhs = jt * j;
        for d in 0..DOF {
            lhs[(d, d)] += opts.damping;
        }
        let rhs = jt * err;
        let Some(step) = lhs.cholesky().map(|c| c.solve(&rhs)) else {
            break;
        };
        let mut candidate = q;
        for i in 0..DOF {
            candidate[i] += step[i];
        }
        dh.clamp(&mut candidate);
        let cand_pose = dh.forward_unchecked(&candidate);
        let cand_err = residual(target, &cand_pose);
        let stalled = cand_err.norm() >= err.norm() && step.norm() < 1e-14;
        if stalled {
            break;
        }
        q = candidate;
        err = cand_err;
    }
    let (ep, er) = split_norms(&err);
    if ep <= opts.tol_pos && er <= opts.tol_rot {
        Ok(q)
    } else {
        Err(Error::IkNoConvergence {
            iterations,
            pos_residual: ep,
            rot_residual: er,
        })
    }
}

fn split_norms(e: &SVector<f64, 6>) -> (f64, f64) {
    (
        e.fixed_rows::<3>(0).norm(),
        e.fixed_rows::<3>(3).norm(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_matches_finite_differences() {
        let dh = DhTable::default();
        let q = JointConfig::new([0.2, -0.1, 0.12, 0.3, -0.3, 0.1]);
        let j = jacobian(&dh, &q);
        let p0 = dh.forward_unchecked(&q);
        let h = 1e-6;
        for i in 0..DOF {
            let mut qp = q;
            qp[i] += h;
            let mut qm = q;
            qm[i] -= h;
            let pp = dh.forward_unchecked(&qp);
            let pm = dh.forward_unchecked(&qm);
            let lin = (pp.translation - pm.translation) / (2.0 * h);
            let ang = (rotation_log(&(pp.rotation * p0.rotation.transpose()))
                - rotation_log(&(pm.rotation * p0.rotation.transpose())))
                / (2.0 * h);
            for r in 0..3 {
                assert!((lin[r] - j[(r, i)]).abs() < 1e-7, "lin {r},{i}");
                assert!((ang[r] - j[(r + 3, i)]).abs() < 1e-7, "ang {r},{i}");
            }
        }
    }

    #[test]
    fn exact_seed_returns_seed() {
        let dh = DhTable::default();
        let q = JointConfig::new([0.4, 0.3, 0.2, -1.0, 0.5, -0.7]);
        let target = dh.forward(&q).unwrap();
        let sol = inverse_kinematics(&dh, &target, &q, &IkOptions::default()).unwrap();
        assert!(sol.max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn perturbed_seed_recovers() {
        let dh = DhTable::default();
        let q = JointConfig::new([-0.6, 0.5, 0.15, 0.9, -0.2, 0.4]);
        let target = dh.forward(&q).unwrap();
        let seed = JointConfig(std::array::from_fn(|i| q[i] + 0.05 * if i == 2 { 0.2 } else { 1.0 }));
        let sol = inverse_kinematics(&dh, &target, &seed, &IkOptions::default()).unwrap();
        assert!(sol.max_abs_diff(&q) < 1e-9, "{sol:?}");
    }

    #[test]
    fn unreachable_target_reports_residual() {
        let dh = DhTable::default();
        let target = Pose::from_translation(Vector3::new(0.0, 0.0, 2.0));
        match inverse_kinematics(&dh, &target, &dh.home(), &IkOptions::default()) {
            Err(Error::IkNoConvergence { pos_residual, .. }) => assert!(pos_residual > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seed_outside_limits_rejected() {
        let dh = DhTable::default();
        let mut seed = dh.home();
        seed[0] = 9.0;
        assert!(inverse_kinematics(&dh, &Pose::identity(), &seed, &IkOptions::default()).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
    }
}
