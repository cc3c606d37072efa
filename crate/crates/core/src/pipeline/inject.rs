use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{joint_difference, DhTable, JointConfig, Pose};
use crate::learning::{encode_features, MlpModel, Role};
use crate::phystwin::StepRecord;

/// One step of the simulated robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionResult {
    pub k: usize,
    /// Setpoint (S2, equal to S1).
    pub setpoint_q: JointConfig,
    /// Controller offset predicted by the first network.
    pub alpha1: JointConfig,
    /// Mechanism offset predicted by the second network.
    pub alpha2: JointConfig,
    /// Simulated encoder joints (M2 = S1 + alpha1).
    pub measured_q: JointConfig,
    /// Joints commanded to the ideal simulated robot.
    pub actual_q: JointConfig,
    /// A2 = FK(nominal, actual_q).
    pub actual_pose: Pose,
    /// The commanded joints were clamped to the limits.
    pub clamped: bool,
}

impl InjectionResult {
    /// The ideal simulated robot with nothing injected.
    pub fn uninjected(dh: &DhTable, k: usize, setpoint: &JointConfig) -> Self {
        Self {
            k,
            setpoint_q: *setpoint,
            alpha1: JointConfig::ZERO,
            alpha2: JointConfig::ZERO,
            measured_q: *setpoint,
            actual_q: *setpoint,
            actual_pose: dh.forward_unchecked(setpoint),
            clamped: false,
        }
    }

    /// Reads a physical record as if it were a simulated step.
    pub fn from_record(dh: &DhTable, rec: &StepRecord) -> Self {
        Self {
            k: rec.k,
            setpoint_q: rec.setpoint_q,
            alpha1: joint_difference(dh, &rec.measured_q, &rec.setpoint_q),
            alpha2: joint_difference(dh, &rec.actual_q, &rec.measured_q),
            measured_q: rec.measured_q,
            actual_q: rec.actual_q,
            actual_pose: rec.actual_pose.clone(),
            clamped: false,
        }
    }
}

/// Sequential three-stage injector. Keeps the previous simulated measured
/// joints for the CP/CPE features; the first step uses its own setpoint.
#[derive(Debug, Clone)]
pub struct Injector {
    nn1: MlpModel,
    nn2: MlpModel,
    dh: DhTable,
    prev_measured: Option<JointConfig>,
    k: usize,
}

impl Injector {
    pub fn new(nn1: MlpModel, nn2: MlpModel, dh: DhTable) -> Result<Self> {
        dh.validate()?;
        for (model, role) in [(&nn1, Role::Controller), (&nn2, Role::Mechanism)] {
            model.validate()?;
            if model.role != role {
                return Err(Error::InvalidConfig(format!(
                    "expected a {role} model, got {}",
                    model.role
                )));
            }
        }
        Ok(Self {
            nn1,
            nn2,
            dh,
            prev_measured: None,
            k: 0,
        })
    }

    pub fn dh(&self) -> &DhTable {
        &self.dh
    }

    /// Forgets the previous state.
    pub fn reset(&mut self) {
        self.prev_measured = None;
        self.k = 0;
    }

    pub fn step(&mut self, setpoint: &JointConfig) -> Result<InjectionResult> {
        let k = self.k;
        self.dh.check_limits(setpoint).map_err(|e| e.at_step(k))?;
        let prev = self.prev_measured.unwrap_or(*setpoint);

        let alpha1 = JointConfig(
            self.nn1
                .predict(&encode_features(self.nn1.encoding, setpoint, &prev))
                .map_err(|e| e.at_step(k))?,
        );
        let measured = *setpoint + alpha1;
        let alpha2 = JointConfig(
            self.nn2
                .predict(&encode_features(self.nn2.encoding, &measured, &prev))
                .map_err(|e| e.at_step(k))?,
        );
        let mut actual = *setpoint + (alpha1 + alpha2);
        if !actual.is_finite() {
            return Err(Error::InvalidConfig("non-finite injected offsets".into()).at_step(k));
        }
        let clamped = self.dh.clamp(&mut actual);

        self.prev_measured = Some(measured);
        self.k += 1;
        Ok(InjectionResult {
            k,
            setpoint_q: *setpoint,
            alpha1,
            alpha2,
            measured_q: measured,
            actual_pose: self.dh.forward_unchecked(&actual),
            actual_q: actual,
            clamped,
        })
    }
}

/// Runs the injector over a setpoint sequence from a fresh state.
pub fn inject(
    nn1: &MlpModel,
    nn2: &MlpModel,
    dh: &DhTable,
    setpoints: &[JointConfig],
) -> Result<Vec<InjectionResult>> {
    let mut injector = Injector::new(nn1.clone(), nn2.clone(), dh.clone())?;
    setpoints.iter().map(|s| injector.step(s)).collect()
}

/// The same setpoints on the ideal robot without injection.
pub fn uninjected(dh: &DhTable, setpoints: &[JointConfig]) -> Result<Vec<InjectionResult>> {
    setpoints
        .iter()
        .enumerate()
        .map(|(k, s)| {
            dh.check_limits(s).map_err(|e| e.at_step(k))?;
            Ok(InjectionResult::uninjected(dh, k, s))
        })
        .collect()
}
