use std::ops::Neg;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{Vec3, UP};

/// Maximum norm drift tolerated after a product of unit quaternions.
const UNIT_DRIFT: f64 = 1e-6;

/// Hamilton quaternion stored scalar-first.
///
/// Serialized as the array `[w, x, y, z]`. Orientation quaternions are kept at
/// unit norm; `q` and `-q` describe the same rotation, so compare rotations with
/// [`Quaternion::rotation_distance`] rather than component-wise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from([w, x, y, z]: [f64; 4]) -> Self {
        Self { w, x, y, z }
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let axis = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        Self::new(c, s * axis.x, s * axis.y, s * axis.z)
    }

    /// Smallest rotation taking direction `from` onto direction `to`.
    ///
    /// Antiparallel inputs rotate by pi about an arbitrary axis orthogonal to
    /// `from`.
    pub fn shortest_arc(from: Vec3, to: Vec3) -> Self {
        let a = from.normalize();
        let b = to.normalize();
        let d = a.dot(&b);
        if d < -1.0 + 1e-12 {
            let helper = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let axis = a.cross(&helper).normalize();
            return Self::new(0.0, axis.x, axis.y, axis.z);
        }
        let c = a.cross(&b);
        Self::new(1.0 + d, c.x, c.y, c.z).normalized()
    }

    pub fn vector(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// `(w, -x, -y, -z)`; the inverse of a unit quaternion.
    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Raw Hamilton product without renormalization.
    pub fn hamilton(&self, b: &Quaternion) -> Self {
        let a = self;
        Self::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }

    /// Hamilton product `self ⊗ b`, renormalized to unit length.
    ///
    /// Both operands are expected to be unit quaternions; in debug builds a
    /// product whose norm drifts by more than 1e-6 trips an assertion.
    pub fn mul(&self, b: &Quaternion) -> Self {
        let p = self.hamilton(b);
        debug_assert!(
            p.is_unit(UNIT_DRIFT),
            "quaternion product drifted from unit norm: |p| = {}",
            p.norm()
        );
        p.normalized()
    }

    /// Rotates `v` by this quaternion: the vector part of `q ⊗ (0, v) ⊗ q*`.
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        let p = Quaternion::new(0.0, v.x, v.y, v.z);
        self.hamilton(&p).hamilton(&self.conjugate()).vector()
    }

    /// Equivalent 3×3 rotation matrix of a unit quaternion.
    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let Quaternion { w, x, y, z } = *self;
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Angle in radians of the rotation taking `self` to `other`; 0 for `q` vs `-q`.
    pub fn rotation_distance(&self, other: &Quaternion) -> f64 {
        let rel = self.conjugate().hamilton(other);
        2.0 * rel.vector().norm().atan2(rel.w.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Global-frame sensor orientation from a local reading: `q_local ⊗ q_local_to_global`.
pub fn imu_local_to_global(q_local: &Quaternion, q_local_to_global: &Quaternion) -> Quaternion {
    q_local.mul(q_local_to_global)
}

/// Bone orientation with the wearing offset removed: `q_wear* ⊗ q_global`.
pub fn imu_apply_wear_offset(q_wear: &Quaternion, q_global: &Quaternion) -> Quaternion {
    q_wear.conjugate().mul(q_global)
}

/// Rotation of `angle` radians about the world vertical (+Z) axis.
pub fn vertical_axis_quaternion(angle: f64) -> Quaternion {
    Quaternion::from_axis_angle(UP, angle)
}
