//! Synthetic physical twin: a stand-in for a real cable-driven arm that
//! produces setpoint, measured and tracker-observed poses with realistic,
//! structured errors.
//!
//! Error model, per joint `i`:
//!
//! - controller error `g_i * f_i(q)` on the setpoint with
//!   `f = (sin q2, cos q2 sin q1, q3, sin q4, sin q5, sin q6)`, plus Gaussian
//!   joint noise; the encoders report this state exactly (`measured_q`),
//! - a direction-dependent lag `-dir_i * (h_i + b_i / 2)` between the encoder
//!   and the true joint, where `dir_i = sign(measured_i - prev_measured_i)`
//!   (zero motion counts as `+1`), `h` is the hysteresis magnitude and `b`
//!   the backlash width,
//! - kinematic error from evaluating the true pose with a perturbed DH table,
//! - tracker noise on the marker pose.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::calibration::{
    compute_actual_pose, solve_hand_eye, HandEyeSolution, MarkerObservation,
    DEFAULT_MIN_OBSERVATIONS,
};
use crate::error::{Error, Result};
use crate::kinematics::{inverse_kinematics, DhTable, IkOptions, JointConfig, Pose, DOF};

/// Joint-space random trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub setpoints: Vec<JointConfig>,
    pub seed: u64,
    pub interpolation_step: [f64; DOF],
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.setpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.setpoints.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryParams {
    pub n_goals: usize,
    /// Maximum per-joint change between consecutive setpoints.
    pub interpolation_step: [f64; DOF],
    /// Truncate to this many setpoints.
    pub max_steps: Option<usize>,
    /// Goals are drawn from the joint ranges shrunk by this fraction on each
    /// side, leaving room for the twin's errors inside the limits.
    pub goal_margin: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self::training()
    }
}

impl TrajectoryParams {
    pub const TRAINING_STEPS: usize = 3684;
    pub const TEST_STEPS: usize = 1000;

    pub fn training() -> Self {
        Self {
            n_goals: 400,
            interpolation_step: default_interpolation_step(&DhTable::default()),
            max_steps: Some(Self::TRAINING_STEPS),
            goal_margin: 0.05,
        }
    }

    pub fn test() -> Self {
        Self {
            n_goals: 120,
            max_steps: Some(Self::TEST_STEPS),
            ..Self::training()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_goals == 0 {
            return Err(Error::InvalidConfig("n_goals must be at least 1".into()));
        }
        if !self.interpolation_step.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidConfig(
                "interpolation_step entries must be positive".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.goal_margin) {
            return Err(Error::InvalidConfig("goal_margin must be in [0, 0.5)".into()));
        }
        Ok(())
    }
}

/// One sixteenth of each joint range.
pub fn default_interpolation_step(dh: &DhTable) -> [f64; DOF] {
    std::array::from_fn(|i| {
        let (lo, hi) = dh.limits(i);
        (hi - lo) / 16.0
    })
}

/// Random goals, uniform within the limits, joined by joint-space linear
/// interpolation starting from the middle of the joint ranges.
pub fn generate_trajectory(
    dh: &DhTable,
    n_goals: usize,
    interpolation_step: [f64; DOF],
    seed: u64,
) -> Result<Trajectory> {
    let params = TrajectoryParams {
        n_goals,
        interpolation_step,
        max_steps: None,
        goal_margin: 0.0,
    };
    generate_trajectory_with(dh, &params, seed)
}

pub fn generate_trajectory_with(
    dh: &DhTable,
    params: &TrajectoryParams,
    seed: u64,
) -> Result<Trajectory> {
    params.validate()?;
    dh.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = dh.home();
    let mut setpoints = vec![current];
    let cap = params.max_steps.unwrap_or(usize::MAX);
    'goals: for _ in 0..params.n_goals {
        let goal = JointConfig(std::array::from_fn(|i| {
            let (lo, hi) = dh.limits(i);
            let m = params.goal_margin * (hi - lo);
            rng.random_range((lo + m)..=(hi - m))
        }));
        let n = (0..DOF)
            .map(|i| ((goal[i] - current[i]).abs() / params.interpolation_step[i]).ceil() as usize)
            .max()
            .unwrap_or(0)
            .max(1);
        for j in 1..=n {
            if setpoints.len() >= cap {
                break 'goals;
            }
            let s = j as f64 / n as f64;
            let mut q = JointConfig(std::array::from_fn(|i| current[i] + s * (goal[i] - current[i])));
            if j == n {
                q = goal;
            }
            setpoints.push(q);
        }
        current = goal;
    }
    Ok(Trajectory {
        setpoints,
        seed,
        interpolation_step: params.interpolation_step,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerNoise {
    /// Per-axis translation noise, meters.
    pub sigma_t: f64,
    /// Per-axis rotation noise (axis-angle components), radians.
    pub sigma_r: f64,
}

/// Bounds for the one-off DH perturbation that makes the twin's true
/// kinematics differ from the nominal table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicPerturbation {
    /// Max |delta a| and |delta d|, meters.
    pub max_length: f64,
    /// Max |delta alpha| and |delta theta|, radians.
    pub max_angle: f64,
}

/// Twin parameters as stored in the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwinParams {
    pub dh_nominal: DhTable,
    pub kinematic_perturbation: KinematicPerturbation,
    /// Explicit true table; overrides the random perturbation when present.
    pub dh_true: Option<DhTable>,
    pub controller_gains: [f64; DOF],
    pub hysteresis_magnitude: [f64; DOF],
    pub backlash_width: [f64; DOF],
    pub noise_sigma_joint: [f64; DOF],
    /// Step-to-step jitter of the true joints (cable stretch, compliance).
    pub compliance_sigma: [f64; DOF],
    pub tracker_noise: TrackerNoise,
    pub handeye_true: HandEyeSolution,
    pub seed: u64,
}

impl Default for TwinParams {
    fn default() -> Self {
        use nalgebra::Vector3;
        Self {
            dh_nominal: DhTable::default(),
            kinematic_perturbation: KinematicPerturbation {
                max_length: 1e-3,
                max_angle: 0.5_f64.to_radians(),
            },
            dh_true: None,
            controller_gains: [8e-3, 8e-3, 2e-2, 2e-2, 2e-2, 2e-2],
            hysteresis_magnitude: [5e-3, 5e-3, 8e-4, 1.5e-2, 1.5e-2, 1.5e-2],
            backlash_width: [4e-3, 4e-3, 4e-4, 1e-2, 1e-2, 1e-2],
            noise_sigma_joint: [1e-4, 1e-4, 2e-5, 2e-4, 2e-4, 2e-4],
            compliance_sigma: [2e-3, 2e-3, 3e-4, 4e-3, 4e-3, 4e-3],
            tracker_noise: TrackerNoise {
                sigma_t: 1e-4,
                sigma_r: 0.05_f64.to_radians(),
            },
            handeye_true: HandEyeSolution::new(
                Pose::from_axis_angle(
                    Vector3::new(0.05, -0.1, 0.3),
                    Vector3::new(0.012, -0.008, 0.025),
                ),
                Pose::from_axis_angle(Vector3::new(1.2, -0.6, 0.4), Vector3::new(0.15, -0.05, 1.0)),
            ),
            seed: 7,
        }
    }
}

impl TwinParams {
    /// An ideal robot: no errors of any kind.
    pub fn ideal() -> Self {
        Self {
            kinematic_perturbation: KinematicPerturbation {
                max_length: 0.0,
                max_angle: 0.0,
            },
            controller_gains: [0.0; DOF],
            hysteresis_magnitude: [0.0; DOF],
            backlash_width: [0.0; DOF],
            noise_sigma_joint: [0.0; DOF],
            compliance_sigma: [0.0; DOF],
            tracker_noise: TrackerNoise {
                sigma_t: 0.0,
                sigma_r: 0.0,
            },
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<TwinConfig> {
        self.dh_nominal.validate()?;
        let dh_true = match &self.dh_true {
            Some(t) => t.clone(),
            None => perturb_dh(&self.dh_nominal, &self.kinematic_perturbation, self.seed),
        };
        let cfg = TwinConfig {
            dh_true,
            dh_nominal: self.dh_nominal.clone(),
            controller_gains: self.controller_gains,
            hysteresis_magnitude: self.hysteresis_magnitude,
            backlash_width: self.backlash_width,
            noise_sigma_joint: self.noise_sigma_joint,
            compliance_sigma: self.compliance_sigma,
            tracker_noise: self.tracker_noise,
            handeye_true: self.handeye_true,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Adds uniform perturbations within the bounds to every DH row. Joint kinds
/// and limits are kept.
pub fn perturb_dh(nominal: &DhTable, bounds: &KinematicPerturbation, seed: u64) -> DhTable {
    // separate stream from the measurement noise
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b69_6e65_6d61_7469);
    let mut sym = |m: f64| if m > 0.0 { rng.random_range(-m..=m) } else { 0.0 };
    let mut table = nominal.clone();
    for row in &mut table.rows {
        row.a += sym(bounds.max_length);
        row.d_offset += sym(bounds.max_length);
        row.alpha += sym(bounds.max_angle);
        row.theta_offset += sym(bounds.max_angle);
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinConfig {
    pub dh_true: DhTable,
    pub dh_nominal: DhTable,
    pub controller_gains: [f64; DOF],
    pub hysteresis_magnitude: [f64; DOF],
    pub backlash_width: [f64; DOF],
    pub noise_sigma_joint: [f64; DOF],
    pub compliance_sigma: [f64; DOF],
    pub tracker_noise: TrackerNoise,
    pub handeye_true: HandEyeSolution,
    pub seed: u64,
}

impl TwinConfig {
    pub fn validate(&self) -> Result<()> {
        self.dh_true.validate()?;
        self.dh_nominal.validate()?;
        for (t, n) in self.dh_true.rows.iter().zip(&self.dh_nominal.rows) {
            if t.kind != n.kind || t.lower != n.lower || t.upper != n.upper {
                return Err(Error::InvalidConfig(
                    "true and nominal DH tables must share joint kinds and limits".into(),
                ));
            }
        }
        let groups = [
            ("controller_gains", &self.controller_gains),
            ("hysteresis_magnitude", &self.hysteresis_magnitude),
            ("backlash_width", &self.backlash_width),
            ("noise_sigma_joint", &self.noise_sigma_joint),
            ("compliance_sigma", &self.compliance_sigma),
        ];
        for (name, values) in groups {
            if !values.iter().all(|v| v.is_finite() && *v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} entries must be >= 0")));
            }
        }
        let tn = self.tracker_noise;
        if !(tn.sigma_t >= 0.0 && tn.sigma_r >= 0.0) {
            return Err(Error::InvalidConfig("tracker noise must be >= 0".into()));
        }
        Ok(())
    }

    /// Deterministic controller offset at setpoint `q`.
    pub fn controller_error(&self, q: &JointConfig) -> JointConfig {
        let f = [
            q[1].sin(),
            q[1].cos() * q[0].sin(),
            q[2],
            q[3].sin(),
            q[4].sin(),
            q[5].sin(),
        ];
        JointConfig(std::array::from_fn(|i| self.controller_gains[i] * f[i]))
    }

    /// Lag of the true joint behind the encoder for the given motion.
    pub fn lag(&self, measured: &JointConfig, prev_measured: &JointConfig) -> JointConfig {
        JointConfig(std::array::from_fn(|i| {
            let dir = motion_direction(measured[i] - prev_measured[i]);
            -dir * (self.hysteresis_magnitude[i] + 0.5 * self.backlash_width[i])
        }))
    }
}

/// `+1` for non-negative motion, `-1` otherwise.
pub fn motion_direction(delta: f64) -> f64 {
    if delta >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One stopped step of the robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    /// Setpoint joints (S1).
    pub setpoint_q: JointConfig,
    /// Encoder joints (M1).
    pub measured_q: JointConfig,
    /// Tracker-derived gripper pose (A1).
    pub actual_pose: Pose,
    /// `actual_pose` expressed as nominal-kinematics joints.
    pub actual_q: JointConfig,
    /// Raw tracker measurement `tracker_T_marker`.
    pub tracker_marker: Pose,
    /// Twin-only ground truth; never part of training data.
    pub true_actual_pose: Option<Pose>,
}

/// Simulates one step. `actual_pose`/`actual_q` are derived through the twin's
/// true hand-eye transforms; [`run_collection`] replaces them with values from
/// a fitted calibration.
pub fn twin_step<R: Rng>(
    cfg: &TwinConfig,
    k: usize,
    setpoint: &JointConfig,
    prev_measured: &JointConfig,
    rng: &mut R,
) -> Result<StepRecord> {
    cfg.dh_nominal.check_limits(setpoint).map_err(|e| e.at_step(k))?;
    let ctrl = cfg.controller_error(setpoint);
    let measured = JointConfig(std::array::from_fn(|i| {
        setpoint[i] + ctrl[i] + gaussian(rng, cfg.noise_sigma_joint[i])
    }));
    let lag = cfg.lag(&measured, prev_measured);
    let joint_state = JointConfig(std::array::from_fn(|i| {
        measured[i] + lag[i] + gaussian(rng, cfg.compliance_sigma[i])
    }));
    let true_pose = cfg.dh_true.forward_unchecked(&joint_state);

    let clean_marker = cfg.handeye_true.predict_tracker_marker(&true_pose);
    let noise = nalgebra::Vector3::from_fn(|_, _| gaussian(rng, cfg.tracker_noise.sigma_r));
    let shift = nalgebra::Vector3::from_fn(|_, _| gaussian(rng, cfg.tracker_noise.sigma_t));
    let tracker_marker = clean_marker * Pose::from_axis_angle(noise, shift);

    let actual_pose = compute_actual_pose(&cfg.handeye_true, &tracker_marker);
    let actual_q = resolve_actual_joints(&cfg.dh_nominal, &actual_pose, &measured)
        .map_err(|e| e.at_step(k))?;
    Ok(StepRecord {
        k,
        setpoint_q: *setpoint,
        measured_q: measured,
        actual_pose,
        actual_q,
        tracker_marker,
        true_actual_pose: Some(true_pose),
    })
}

fn gaussian<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

/// Nominal-kinematics joints reproducing `actual_pose`, searched from the
/// measured joints.
pub fn resolve_actual_joints(
    dh: &DhTable,
    actual_pose: &Pose,
    measured: &JointConfig,
) -> Result<JointConfig> {
    let mut seed = *measured;
    dh.clamp(&mut seed);
    inverse_kinematics(dh, actual_pose, &seed, &IkOptions::default())
}

/// Records plus the calibration used to derive their actual poses.
#[derive(Debug, Clone)]
pub struct Collection {
    pub records: Vec<StepRecord>,
    pub calibration: HandEyeSolution,
}

/// Runs the trajectory through the twin, fits a hand-eye calibration on the
/// collected (measured pose, marker) pairs, and derives every actual pose from
/// that fit. The twin's true calibration is not used for the actual poses.
pub fn run_collection(cfg: &TwinConfig, traj: &Trajectory) -> Result<Collection> {
    let mut records = simulate(cfg, traj)?;
    let observations: Vec<MarkerObservation> = records
        .iter()
        .map(|r| MarkerObservation {
            robot_gripper: cfg.dh_nominal.forward_unchecked(&r.measured_q),
            tracker_marker: r.tracker_marker,
        })
        .collect();
    let calibration = solve_hand_eye(&observations, DEFAULT_MIN_OBSERVATIONS)?;
    apply_calibration(&cfg.dh_nominal, &calibration, &mut records)?;
    Ok(Collection {
        records,
        calibration,
    })
}

/// Like [`run_collection`] but derives actual poses from a given calibration.
pub fn run_collection_with_calibration(
    cfg: &TwinConfig,
    traj: &Trajectory,
    calibration: &HandEyeSolution,
) -> Result<Collection> {
    let mut records = simulate(cfg, traj)?;
    apply_calibration(&cfg.dh_nominal, calibration, &mut records)?;
    Ok(Collection {
        records,
        calibration: *calibration,
    })
}

fn simulate(cfg: &TwinConfig, traj: &Trajectory) -> Result<Vec<StepRecord>> {
    cfg.validate()?;
    let Some(first) = traj.setpoints.first() else {
        return Ok(Vec::new());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ traj.seed.rotate_left(32));
    let mut prev = *first;
    let mut records = Vec::with_capacity(traj.len());
    for (k, setpoint) in traj.setpoints.iter().enumerate() {
        let rec = twin_step(cfg, k, setpoint, &prev, &mut rng)?;
        prev = rec.measured_q;
        records.push(rec);
    }
    Ok(records)
}

/// Recomputes `actual_pose` and `actual_q` of every record from its tracker
/// measurement.
pub fn apply_calibration(
    dh: &DhTable,
    calibration: &HandEyeSolution,
    records: &mut [StepRecord],
) -> Result<()> {
    for rec in records.iter_mut() {
        rec.actual_pose = compute_actual_pose(calibration, &rec.tracker_marker);
        rec.actual_q = resolve_actual_joints(dh, &rec.actual_pose, &rec.measured_q)
            .map_err(|e| e.at_step(rec.k))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{rotation_error, translation_error};

    #[test]
    fn single_goal_is_straight_segment() {
        let dh = DhTable::default();
        let step = default_interpolation_step(&dh);
        let t = generate_trajectory(&dh, 1, step, 3).unwrap();
        let start = t.setpoints[0];
        let goal = *t.setpoints.last().unwrap();
        assert_eq!(start, dh.home());
        let n = t.len() - 1;
        for (j, q) in t.setpoints.iter().enumerate() {
            for i in 0..DOF {
                let expected = start[i] + (goal[i] - start[i]) * j as f64 / n as f64;
                assert!((q[i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trajectory_respects_step_and_limits() {
        let dh = DhTable::default();
        let params = TrajectoryParams::training();
        let t = generate_trajectory_with(&dh, &params, 11).unwrap();
        assert_eq!(t.len(), TrajectoryParams::TRAINING_STEPS);
        for w in t.setpoints.windows(2) {
            for i in 0..DOF {
                assert!((w[1][i] - w[0][i]).abs() <= params.interpolation_step[i] * (1.0 + 1e-12));
            }
        }
        for q in &t.setpoints {
            dh.check_limits(q).unwrap();
        }
    }

    #[test]
    fn trajectory_is_deterministic() {
        let dh = DhTable::default();
        let step = default_interpolation_step(&dh);
        assert_eq!(
            generate_trajectory(&dh, 20, step, 5).unwrap(),
            generate_trajectory(&dh, 20, step, 5).unwrap()
        );
        assert_ne!(
            generate_trajectory(&dh, 20, step, 5).unwrap(),
            generate_trajectory(&dh, 20, step, 6).unwrap()
        );
    }

    #[test]
    fn zero_goals_rejected() {
        let dh = DhTable::default();
        let step = default_interpolation_step(&dh);
        assert!(matches!(
            generate_trajectory(&dh, 0, step, 1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn ideal_twin_step() {
        let cfg = TwinParams::ideal().build().unwrap();
        let q = JointConfig::new([0.2, -0.1, 0.12, 0.3, -0.3, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rec = twin_step(&cfg, 0, &q, &q, &mut rng).unwrap();
        assert_eq!(rec.measured_q, q);
        let fk = cfg.dh_nominal.forward(&q).unwrap();
        assert!(translation_error(&rec.actual_pose, &fk) < 1e-12);
        assert!(rotation_error(&rec.actual_pose, &fk) < 1e-12);
        assert!(rec.actual_q.max_abs_diff(&q) < 1e-9);
    }

    #[test]
    fn out_of_limit_setpoint_rejected() {
        let cfg = TwinParams::ideal().build().unwrap();
        let mut q = cfg.dh_nominal.home();
        q[1] = 3.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = twin_step(&cfg, 4, &q, &q, &mut rng).unwrap_err();
        assert_eq!(err.kind(), "joint_out_of_limits");
        assert!(err.to_string().starts_with("step 4"));
    }

    #[test]
    fn backlash_offset_between_approach_directions() {
        let mut params = TwinParams::ideal();
        params.backlash_width = [2e-3, 3e-3, 5e-4, 1e-2, 2e-2, 3e-2];
        let cfg = params.build().unwrap();
        let target = JointConfig::new([0.1, 0.2, 0.15, -0.3, 0.4, 0.2]);
        let below = JointConfig(std::array::from_fn(|i| target[i] - 0.05 * if i == 2 { 0.1 } else { 1.0 }));
        let above = JointConfig(std::array::from_fn(|i| target[i] + 0.05 * if i == 2 { 0.1 } else { 1.0 }));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let up = twin_step(&cfg, 0, &target, &below, &mut rng).unwrap();
        let down = twin_step(&cfg, 1, &target, &above, &mut rng).unwrap();
        // closed form: joint states differ by exactly the backlash width
        let state_up = target + cfg.lag(&target, &below);
        let state_down = target + cfg.lag(&target, &above);
        for i in 0..DOF {
            assert!(((state_down[i] - state_up[i]) - params.backlash_width[i]).abs() < 1e-15);
        }
        let expected_up = cfg.dh_true.forward_unchecked(&state_up);
        let expected_down = cfg.dh_true.forward_unchecked(&state_down);
        let tu = up.true_actual_pose.unwrap();
        let td = down.true_actual_pose.unwrap();
        assert!(translation_error(&tu, &expected_up) < 1e-15);
        assert!(translation_error(&td, &expected_down) < 1e-15);
        assert!(translation_error(&tu, &td) > 1e-4);
        // measured joints agree: the offset is invisible to the encoders
        assert_eq!(up.measured_q, down.measured_q);
        let dq = down.actual_q - up.actual_q;
        for i in 0..DOF {
            assert!((dq[i] - params.backlash_width[i]).abs() < 1e-8, "joint {i}: {}", dq[i]);
        }
    }

    #[test]
    fn twin_validation() {
        let mut p = TwinParams::default();
        p.noise_sigma_joint[3] = -1.0;
        assert!(p.build().is_err());
        let mut p = TwinParams::default();
        let mut t = p.dh_nominal.clone();
        t.rows[0].upper = 1.0;
        p.dh_true = Some(t);
        assert!(p.build().is_err());
    }

    #[test]
    fn perturbation_within_bounds() {
        let p = TwinParams::default();
        let cfg = p.build().unwrap();
        for (t, n) in cfg.dh_true.rows.iter().zip(&cfg.dh_nominal.rows) {
            assert!((t.a - n.a).abs() <= 1e-3 && (t.d_offset - n.d_offset).abs() <= 1e-3);
            let max = 0.5_f64.to_radians();
            assert!((t.alpha - n.alpha).abs() <= max && (t.theta_offset - n.theta_offset).abs() <= max);
        }
        assert_ne!(cfg.dh_true, cfg.dh_nominal);
    }
}
