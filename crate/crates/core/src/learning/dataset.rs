use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{joint_difference, DhTable, JointConfig, DOF};
use crate::phystwin::{motion_direction, StepRecord};

/// Input feature layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Encoding {
    /// Current joints only (6 features).
    #[serde(rename = "OC")]
    OnlyCurrent,
    /// Current joints plus the previous measured joints (12 features).
    #[serde(rename = "CP")]
    CurrentPrevious,
    /// Current joints plus the per-joint motion direction as +1/-1 (12 features).
    #[serde(rename = "CPE")]
    CurrentPreviousEncoded,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [
        Encoding::OnlyCurrent,
        Encoding::CurrentPrevious,
        Encoding::CurrentPreviousEncoded,
    ];

    pub fn width(self) -> usize {
        match self {
            Encoding::OnlyCurrent => DOF,
            _ => 2 * DOF,
        }
    }

    pub fn needs_previous(self) -> bool {
        self != Encoding::OnlyCurrent
    }

    pub fn tag(self) -> &'static str {
        match self {
            Encoding::OnlyCurrent => "OC",
            Encoding::CurrentPrevious => "CP",
            Encoding::CurrentPreviousEncoded => "CPE",
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "OC" => Ok(Encoding::OnlyCurrent),
            "CP" => Ok(Encoding::CurrentPrevious),
            "CPE" => Ok(Encoding::CurrentPreviousEncoded),
            other => Err(Error::InvalidConfig(format!("unknown encoding '{other}'"))),
        }
    }
}

impl std::fmt::Display for Encoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Which error layer a network models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Controller error: setpoint -> measured.
    #[serde(rename = "NN1")]
    Controller,
    /// Kinematic and non-kinematic error: measured -> actual.
    #[serde(rename = "NN2")]
    Mechanism,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::Controller => "NN1",
            Role::Mechanism => "NN2",
        }
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NN1" => Ok(Role::Controller),
            "NN2" => Ok(Role::Mechanism),
            other => Err(Error::InvalidConfig(format!("unknown role '{other}'"))),
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Feature vector for `current` joints given the previously measured joints.
pub fn encode_features(
    encoding: Encoding,
    current: &JointConfig,
    prev_measured: &JointConfig,
) -> Vec<f64> {
    let mut f = Vec::with_capacity(encoding.width());
    f.extend_from_slice(current.as_array());
    match encoding {
        Encoding::OnlyCurrent => {}
        Encoding::CurrentPrevious => f.extend_from_slice(prev_measured.as_array()),
        Encoding::CurrentPreviousEncoded => {
            f.extend((0..DOF).map(|i| motion_direction(current[i] - prev_measured[i])))
        }
    }
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<[f64; DOF]>,
    pub encoding: Encoding,
    pub role: Role,
}

impl ErrorDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn width(&self) -> usize {
        self.encoding.width()
    }
}

/// Builds the training set for one network.
///
/// - controller network: input from `S^k`, target `M^k - S^k`;
/// - mechanism network: input from `M^k`, target `A^k - M^k` in joint space.
///
/// The previous measured joints `M^(k-1)` supply the CP/CPE features, so the
/// first record is dropped for those encodings.
pub fn build_dataset(
    records: &[StepRecord],
    role: Role,
    encoding: Encoding,
    dh: &DhTable,
) -> Result<ErrorDataset> {
    for (pos, w) in records.windows(2).enumerate() {
        if w[1].k <= w[0].k {
            return Err(Error::UnorderedRecords {
                position: pos + 1,
                k: w[1].k,
            });
        }
    }
    let skip = usize::from(encoding.needs_previous());
    if records.len() <= skip {
        return Err(Error::EmptyDataset);
    }
    let mut inputs = Vec::with_capacity(records.len() - skip);
    let mut targets = Vec::with_capacity(records.len() - skip);
    for idx in skip..records.len() {
        let rec = &records[idx];
        let prev = if skip == 1 {
            records[idx - 1].measured_q
        } else {
            rec.measured_q
        };
        let (current, target) = match role {
            Role::Controller => (
                rec.setpoint_q,
                joint_difference(dh, &rec.measured_q, &rec.setpoint_q),
            ),
            Role::Mechanism => (
                rec.measured_q,
                joint_difference(dh, &rec.actual_q, &rec.measured_q),
            ),
        };
        if !current.is_finite() || !target.is_finite() {
            return Err(Error::InvalidConfig("non-finite joint values".into()).at_step(rec.k));
        }
        inputs.push(encode_features(encoding, &current, &prev));
        targets.push(target.0);
    }
    Ok(ErrorDataset {
        inputs,
        targets,
        encoding,
        role,
    })
}
