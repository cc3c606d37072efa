use errinject::kinematics::{joint_difference, rotation_error, translation_error, DhTable, JointConfig, DOF};
use errinject::phystwin::{
    generate_trajectory_with, run_collection, twin_step, Trajectory, TrajectoryParams, TwinParams,
};
use errinject::pipeline::ks_statistic;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn short_trajectory(seed: u64) -> Trajectory {
    let dh = DhTable::default();
    generate_trajectory_with(
        &dh,
        &TrajectoryParams {
            n_goals: 40,
            ..TrajectoryParams::training()
        },
        seed,
    )
    .unwrap()
}

#[test]
fn collection_is_deterministic() {
    let cfg = TwinParams::default().build().unwrap();
    let traj = short_trajectory(3);
    let a = run_collection(&cfg, &traj).unwrap();
    let b = run_collection(&cfg, &traj).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.calibration, b.calibration);
}

#[test]
fn different_seeds_give_different_noise() {
    let cfg = TwinParams::default().build().unwrap();
    let mut other = TwinParams::default();
    other.seed += 1;
    let other = other.build().unwrap();
    let traj = short_trajectory(3);
    let a = run_collection(&cfg, &traj).unwrap();
    let b = run_collection(&other, &traj).unwrap();
    assert_ne!(a.records[5].measured_q, b.records[5].measured_q);
}

#[test]
fn ideal_twin_has_no_error() {
    let cfg = TwinParams::ideal().build().unwrap();
    let col = run_collection(&cfg, &short_trajectory(4)).unwrap();
    let dh = DhTable::default();
    for r in &col.records {
        assert!(r.measured_q.max_abs_diff(&r.setpoint_q) < 1e-12);
        assert!(joint_difference(&dh, &r.actual_q, &r.measured_q).0.iter().all(|d| d.abs() < 1e-7));
    }
}

#[test]
fn controller_error_alone_is_deterministic_offset() {
    let mut p = TwinParams::ideal();
    p.controller_gains = [1e-2; DOF];
    let cfg = p.build().unwrap();
    let col = run_collection(&cfg, &short_trajectory(5)).unwrap();
    for r in &col.records {
        let expected = cfg.controller_error(&r.setpoint_q);
        for i in 0..DOF {
            assert!((r.measured_q[i] - r.setpoint_q[i] - expected[i]).abs() < 1e-15);
        }
        // Without mechanism terms the actual joints follow the encoder.
        assert!(r.actual_q.max_abs_diff(&r.measured_q) < 1e-7);
    }
}

#[test]
fn hysteresis_flips_with_motion_direction() {
    let mut p = TwinParams::ideal();
    p.hysteresis_magnitude = [0.0, 0.0, 0.0, 0.02, 0.0, 0.0];
    let cfg = p.build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let base = JointConfig([0.1, -0.1, 0.12, 0.2, 0.1, 0.0]);
    let mut up = base;
    up[3] += 0.1;
    let mut down = base;
    down[3] -= 0.1;
    let rise = twin_step(&cfg, 1, &up, &base, &mut rng).unwrap();
    let fall = twin_step(&cfg, 1, &down, &base, &mut rng).unwrap();
    let lag_rise = rise.actual_q[3] - rise.measured_q[3];
    let lag_fall = fall.actual_q[3] - fall.measured_q[3];
    assert!((lag_rise + 0.02).abs() < 1e-7, "{lag_rise}");
    assert!((lag_fall - 0.02).abs() < 1e-7, "{lag_fall}");
}

#[test]
fn kinematic_error_moves_pose_but_not_joints() {
    let mut p = TwinParams::ideal();
    p.kinematic_perturbation.max_length = 2e-3;
    p.kinematic_perturbation.max_angle = 5e-3;
    p.dh_true = None;
    let cfg = p.build().unwrap();
    assert_ne!(cfg.dh_true, cfg.dh_nominal);
    let col = run_collection(&cfg, &short_trajectory(6)).unwrap();
    let moved = col.records.iter().any(|r| {
        let nominal = cfg.dh_nominal.forward_unchecked(&r.measured_q);
        let truth = r.true_actual_pose.unwrap();
        translation_error(&nominal, &truth) > 1e-4 || rotation_error(&nominal, &truth) > 1e-4
    });
    assert!(moved);
    assert!(col.records.iter().all(|r| r.measured_q == r.setpoint_q));
}

#[test]
fn fitted_calibration_is_close_to_truth() {
    let p = TwinParams {
        tracker_noise: TwinParams::default().tracker_noise,
        ..TwinParams::ideal()
    };
    let cfg = p.build().unwrap();
    let col = run_collection(&cfg, &short_trajectory(8)).unwrap();
    let (fit, truth) = (col.calibration, cfg.handeye_true);
    assert!(translation_error(&fit.tracker_robot, &truth.tracker_robot) < 5e-4);
    assert!(translation_error(&fit.gripper_marker, &truth.gripper_marker) < 5e-4);
    assert!(rotation_error(&fit.tracker_robot, &truth.tracker_robot) < 0.2_f64.to_radians());
    assert!(rotation_error(&fit.gripper_marker, &truth.gripper_marker) < 0.2_f64.to_radians());
}

#[test]
fn errors_are_stationary_over_a_long_run() {
    let dh = DhTable::default();
    let cfg = TwinParams::default().build().unwrap();
    let params = TrajectoryParams {
        n_goals: 2000,
        max_steps: None,
        ..TrajectoryParams::training()
    };
    let traj = generate_trajectory_with(&dh, &params, 11).unwrap();
    let col = run_collection(&cfg, &traj).unwrap();
    let (first, second) = col.records.split_at(col.records.len() / 2);
    for i in 0..DOF {
        let ms = |rs: &[errinject::phystwin::StepRecord]| -> Vec<f64> {
            rs.iter().map(|r| r.measured_q[i] - r.setpoint_q[i]).collect()
        };
        let am = |rs: &[errinject::phystwin::StepRecord]| -> Vec<f64> {
            rs.iter().map(|r| joint_difference(&dh, &r.actual_q, &r.measured_q)[i]).collect()
        };
        assert!(ks_statistic(&ms(first), &ms(second)) < 0.1, "M-S joint {i}");
        assert!(ks_statistic(&am(first), &am(second)) < 0.1, "A-M joint {i}");
    }
}

#[test]
fn trajectory_respects_cap_and_limits() {
    let dh = DhTable::default();
    let traj = generate_trajectory_with(&dh, &TrajectoryParams::training(), 1).unwrap();
    assert_eq!(traj.len(), TrajectoryParams::training().max_steps.unwrap());
    for q in &traj.setpoints {
        dh.check_limits(q).unwrap();
    }
    for w in traj.setpoints.windows(2) {
        for i in 0..DOF {
            assert!((w[1][i] - w[0][i]).abs() <= traj.interpolation_step[i] + 1e-12);
        }
    }
}
