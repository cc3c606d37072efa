//! Rigid transforms in SE(3) and the pose-error metrics used to compare
//! robot trajectories.

use nalgebra::{Matrix3, Matrix4, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthonormality tolerance accepted when constructing a pose from raw data.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// A rigid transform `T = (R, t)`; rotation is orthonormal with det +1,
/// translation is in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "PoseRepr", try_from = "PoseRepr")]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

/// Serialized form: unit quaternion `(w, x, y, z)` plus translation.
#[derive(Serialize, Deserialize)]
struct PoseRepr {
    quaternion_wxyz: [f64; 4],
    translation: [f64; 3],
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        Self {
            quaternion_wxyz: p.quaternion(),
            translation: p.translation.into(),
        }
    }
}

impl TryFrom<PoseRepr> for Pose {
    type Error = Error;

    fn try_from(r: PoseRepr) -> Result<Self> {
        Pose::from_quaternion(r.quaternion_wxyz, r.translation)
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose without validating the rotation.
    pub fn new_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    /// Builds a pose, rejecting rotations that are not orthonormal or are
    /// reflections.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let pose = Self::new_unchecked(rotation, translation);
        pose.validate()?;
        Ok(pose)
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::new_unchecked(Matrix3::identity(), t)
    }

    pub fn from_rotation(r: Matrix3<f64>) -> Self {
        Self::new_unchecked(r, Vector3::zeros())
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_rotation(*Rotation3::from_axis_angle(&Vector3::x_axis(), angle).matrix())
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_rotation(*Rotation3::from_axis_angle(&Vector3::y_axis(), angle).matrix())
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_rotation(*Rotation3::from_axis_angle(&Vector3::z_axis(), angle).matrix())
    }

    /// Rotation by the axis-angle vector `w` (radians), then translation `t`.
    pub fn from_axis_angle(w: Vector3<f64>, t: Vector3<f64>) -> Self {
        Self::new_unchecked(*Rotation3::new(w).matrix(), t)
    }

    /// Unit quaternion `(w, x, y, z)` and translation. The quaternion is
    /// normalized; a zero quaternion is rejected.
    pub fn from_quaternion(q: [f64; 4], t: [f64; 3]) -> Result<Self> {
        let quat = nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]);
        let norm = quat.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidPose(format!("degenerate quaternion {q:?}")));
        }
        let unit = UnitQuaternion::from_quaternion(quat);
        Pose::new(*unit.to_rotation_matrix().matrix(), Vector3::from(t))
    }

    /// Quaternion `(w, x, y, z)` with `w >= 0`, unit norm.
    pub fn quaternion(&self) -> [f64; 4] {
        let rot = Rotation3::from_matrix_unchecked(self.rotation);
        let q = UnitQuaternion::from_rotation_matrix(&rot);
        let mut c = [q.w, q.i, q.j, q.k];
        if c[0] < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        c.iter_mut().for_each(|v| *v /= n);
        c
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn from_matrix(m: &Matrix4<f64>) -> Result<Self> {
        Pose::new(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        compose(self, other)
    }

    pub fn inverse(&self) -> Pose {
        inverse(self)
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rotation.iter().all(|v| v.is_finite())
            || !self.translation.iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidPose("non-finite entries".into()));
        }
        let ortho = (self.rotation.transpose() * self.rotation - Matrix3::identity()).norm();
        if ortho >= ORTHONORMAL_TOL {
            return Err(Error::InvalidPose(format!(
                "rotation not orthonormal (|R'R - I| = {ortho:e})"
            )));
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidPose(format!("rotation determinant {det}")));
        }
        Ok(())
    }

    /// Axis-angle vector `w` with `exp([w]) = R`.
    pub fn rotation_vector(&self) -> Vector3<f64> {
        rotation_log(&self.rotation)
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        compose(&self, &rhs)
    }
}

impl std::ops::Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        compose(self, rhs)
    }
}

pub fn compose(a: &Pose, b: &Pose) -> Pose {
    Pose {
        rotation: a.rotation * b.rotation,
        translation: a.rotation * b.translation + a.translation,
    }
}

pub fn inverse(p: &Pose) -> Pose {
    let rt = p.rotation.transpose();
    Pose {
        rotation: rt,
        translation: -(rt * p.translation),
    }
}

/// Euclidean distance between the translational parts, in meters.
pub fn translation_error(a: &Pose, b: &Pose) -> f64 {
    (a.translation - b.translation).norm()
}

/// Angle of the relative rotation `R_a R_b^-1`, in radians, within `[0, pi]`.
///
/// This is `arccos((Tr(R_a R_b^-1) - 1) / 2)`, evaluated as
/// `atan2(|skew| / 2, (Tr - 1) / 2)` so it keeps full precision near zero
/// and never produces NaN when round-off pushes the trace past 3.
pub fn rotation_error(a: &Pose, b: &Pose) -> f64 {
    let rel = a.rotation * b.rotation.transpose();
    let cos = (rel.trace() - 1.0) / 2.0;
    let skew = Vector3::new(
        rel[(2, 1)] - rel[(1, 2)],
        rel[(0, 2)] - rel[(2, 0)],
        rel[(1, 0)] - rel[(0, 1)],
    );
    (skew.norm() / 2.0).atan2(cos)
}

/// Matrix logarithm of a rotation as an axis-angle vector. Robust near 0 and pi.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos.acos();
    let skew = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    if angle < 1e-6 {
        // first-order: R ~ I + [w]
        return skew * 0.5;
    }
    if std::f64::consts::PI - angle < 1e-4 {
        // near pi the skew part vanishes; recover the axis from the symmetric part
        let b = (r + Matrix3::identity()) * 0.5;
        let (i, _) = (0..3)
            .map(|i| (i, b[(i, i)]))
            .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut axis = b.column(i).into_owned();
        axis /= axis.norm();
        // disambiguate the sign using the (small) skew part
        if axis.dot(&skew) < 0.0 {
            axis = -axis;
        }
        return axis * angle;
    }
    skew * (angle / (2.0 * angle.sin()))
}

/// Projects a 3x3 matrix onto the nearest rotation (Frobenius norm), forcing
/// determinant +1.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    u * d * v_t
}
