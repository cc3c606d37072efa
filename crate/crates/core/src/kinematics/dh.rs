//! Denavit-Hartenberg chains and forward kinematics.
//!
//! Link transforms follow the modified (Craig) convention: row `i` maps frame
//! `i-1` to frame `i` as `Rx(alpha) * Tx(a) * Rz(theta) * Tz(d)`, where the
//! joint variable adds to `theta` (revolute) or `d` (prismatic).

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Index, IndexMut, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::pose::Pose;
use crate::error::{Error, Result};

pub const DOF: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// Six joint values; revolute entries in radians, the prismatic entry in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointConfig(pub [f64; DOF]);

impl JointConfig {
    pub const ZERO: JointConfig = JointConfig([0.0; DOF]);

    pub fn new(q: [f64; DOF]) -> Self {
        Self(q)
    }

    pub fn as_array(&self) -> &[f64; DOF] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn max_abs_diff(&self, other: &JointConfig) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<[f64; DOF]> for JointConfig {
    fn from(q: [f64; DOF]) -> Self {
        Self(q)
    }
}

impl Index<usize> for JointConfig {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointConfig {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for JointConfig {
    type Output = JointConfig;

    fn add(self, rhs: JointConfig) -> JointConfig {
        JointConfig(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for JointConfig {
    type Output = JointConfig;

    fn sub(self, rhs: JointConfig) -> JointConfig {
        JointConfig(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d_offset: f64,
    pub theta_offset: f64,
    pub kind: JointKind,
    pub lower: f64,
    pub upper: f64,
}

impl DhRow {
    pub fn revolute(a: f64, alpha: f64, d: f64, theta_offset: f64, limits: (f64, f64)) -> Self {
        Self {
            a,
            alpha,
            d_offset: d,
            theta_offset,
            kind: JointKind::Revolute,
            lower: limits.0,
            upper: limits.1,
        }
    }

    pub fn prismatic(a: f64, alpha: f64, d_offset: f64, theta: f64, limits: (f64, f64)) -> Self {
        Self {
            a,
            alpha,
            d_offset,
            theta_offset: theta,
            kind: JointKind::Prismatic,
            lower: limits.0,
            upper: limits.1,
        }
    }

    /// Link transform for joint value `q`.
    pub fn transform(&self, q: f64) -> Pose {
        let (theta, d) = match self.kind {
            JointKind::Revolute => (self.theta_offset + q, self.d_offset),
            JointKind::Prismatic => (self.theta_offset, self.d_offset + q),
        };
        let (sa, ca) = self.alpha.sin_cos();
        let (st, ct) = theta.sin_cos();
        #[rustfmt::skip]
        let rotation = Matrix3::new(
            ct,      -st,      0.0,
            st * ca, ct * ca, -sa,
            st * sa, ct * sa,  ca,
        );
        let translation = Vector3::new(self.a, -sa * d, ca * d);
        Pose::new_unchecked(rotation, translation)
    }
}

/// A six-row modified-DH table with per-joint limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhTable {
    pub rows: Vec<DhRow>,
}

impl Default for DhTable {
    fn default() -> Self {
        Self::default_psm()
    }
}

impl DhTable {
    pub fn new(rows: Vec<DhRow>) -> Result<Self> {
        let table = Self { rows };
        table.validate()?;
        Ok(table)
    }

    /// Illustrative RR-P-RRR surgical-arm chain: yaw and pitch about a
    /// remote center, an insertion stage of 0.05-0.24 m, and a three-joint
    /// wrist. Link values resemble a patient-side manipulator but are not a
    /// calibrated model of any specific robot.
    pub fn default_psm() -> Self {
        Self {
            rows: vec![
                DhRow::revolute(0.0, FRAC_PI_2, 0.0, FRAC_PI_2, (-1.2, 1.2)),
                DhRow::revolute(0.0, -FRAC_PI_2, 0.0, -FRAC_PI_2, (-0.8, 0.8)),
                DhRow::prismatic(0.0, FRAC_PI_2, -0.4318, 0.0, (0.05, 0.24)),
                DhRow::revolute(0.0, 0.0, 0.4162, 0.0, (-1.5, 1.5)),
                DhRow::revolute(0.0, -FRAC_PI_2, 0.0, -FRAC_PI_2, (-1.2, 1.2)),
                DhRow::revolute(0.0091, -FRAC_PI_2, 0.0, -FRAC_PI_2, (-1.2, 1.2)),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != DOF {
            return Err(Error::InvalidDhTable(format!(
                "expected {DOF} rows, got {}",
                self.rows.len()
            )));
        }
        let prismatic = self
            .rows
            .iter()
            .filter(|r| r.kind == JointKind::Prismatic)
            .count();
        if prismatic != 1 {
            return Err(Error::InvalidDhTable(format!(
                "expected exactly one prismatic joint, got {prismatic}"
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let values = [row.a, row.alpha, row.d_offset, row.theta_offset];
            if !values.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidDhTable(format!("row {i} has non-finite values")));
            }
            if !(row.lower < row.upper) {
                return Err(Error::InvalidDhTable(format!(
                    "row {i} limits [{}, {}] are not increasing",
                    row.lower, row.upper
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self, joint: usize) -> JointKind {
        self.rows[joint].kind
    }

    pub fn limits(&self, joint: usize) -> (f64, f64) {
        (self.rows[joint].lower, self.rows[joint].upper)
    }

    pub fn lower(&self) -> JointConfig {
        JointConfig(std::array::from_fn(|i| self.rows[i].lower))
    }

    pub fn upper(&self) -> JointConfig {
        JointConfig(std::array::from_fn(|i| self.rows[i].upper))
    }

    /// Midpoint of every joint range.
    pub fn home(&self) -> JointConfig {
        JointConfig(std::array::from_fn(|i| 0.5 * (self.rows[i].lower + self.rows[i].upper)))
    }

    pub fn check_limits(&self, q: &JointConfig) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let v = q[i];
            if !(v >= row.lower && v <= row.upper) {
                return Err(Error::JointOutOfLimits {
                    joint: i,
                    value: v,
                    lo: row.lower,
                    hi: row.upper,
                });
            }
        }
        Ok(())
    }

    /// Clamps into the limits; returns whether anything changed.
    pub fn clamp(&self, q: &mut JointConfig) -> bool {
        let mut clamped = false;
        for (i, row) in self.rows.iter().enumerate() {
            let v = q[i].clamp(row.lower, row.upper);
            if v != q[i] {
                q[i] = v;
                clamped = true;
            }
        }
        clamped
    }

    /// Forward kinematics, rejecting configurations outside the limits.
    pub fn forward(&self, q: &JointConfig) -> Result<Pose> {
        self.check_limits(q)?;
        Ok(self.forward_unchecked(q))
    }

    /// Forward kinematics without the limit check.
    pub fn forward_unchecked(&self, q: &JointConfig) -> Pose {
        self.rows
            .iter()
            .enumerate()
            .fold(Pose::identity(), |acc, (i, row)| acc * row.transform(q[i]))
    }

    /// Frames `0..=6` expressed in the base frame; entry `i + 1` is the frame
    /// of joint `i`.
    pub(crate) fn frames(&self, q: &JointConfig) -> [Pose; DOF + 1] {
        let mut out = [Pose::identity(); DOF + 1];
        for (i, row) in self.rows.iter().enumerate() {
            out[i + 1] = out[i] * row.transform(q[i]);
        }
        out
    }
}

/// Forward kinematics: product of the six link transforms.
pub fn forward_kinematics(dh: &DhTable, q: &JointConfig) -> Result<Pose> {
    dh.forward(q)
}
