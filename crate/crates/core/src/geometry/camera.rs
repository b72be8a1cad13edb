use nalgebra::{Matrix3, Matrix3x4, Vector4};
use serde::{Deserialize, Serialize};

use super::{Quaternion, Vec3};
use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-6;
const DEGENERATE_DEPTH: f64 = 1e-9;

/// Continuous pixel coordinates of a projected point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    /// Positive depth in the camera frame.
    pub in_front: bool,
}

/// Pinhole camera: `pixel ~ K · [R | t] · [X; 1]` with `[R | t]` mapping world
/// millimeters into the camera frame. No lens distortion.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraModel {
    pub name: String,
    pub intrinsics: Matrix3<f64>,
    pub extrinsics: Matrix3x4<f64>,
    pub width: u32,
    pub height: u32,
}

impl CameraModel {
    pub fn new(
        name: impl Into<String>,
        intrinsics: Matrix3<f64>,
        extrinsics: Matrix3x4<f64>,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let camera = Self {
            name: name.into(),
            intrinsics,
            extrinsics,
            width,
            height,
        };
        camera.validate()?;
        Ok(camera)
    }

    /// Camera at `eye` looking at `target`, with image rows running along `-up`.
    ///
    /// The camera frame is x right, y down, z forward.
    #[allow(clippy::too_many_arguments)]
    pub fn look_at(
        name: impl Into<String>,
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        focal: f64,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let forward = (target - eye).normalize();
        let right = forward.cross(&up);
        if right.norm() < 1e-9 {
            return Err(Error::InvalidInput(
                "look_at: view direction is parallel to the up vector".into(),
            ));
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let rotation = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let translation = -(rotation * eye);
        let intrinsics = Matrix3::new(
            focal,
            0.0,
            (width as f64 - 1.0) / 2.0,
            0.0,
            focal,
            (height as f64 - 1.0) / 2.0,
            0.0,
            0.0,
            1.0,
        );
        Self::new(
            name,
            intrinsics,
            compose_extrinsics(&rotation, &translation),
            width,
            height,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config(format!(
                "camera {}: image dimensions must be positive",
                self.name
            )));
        }
        let k = &self.intrinsics;
        if k[(1, 0)] != 0.0 || k[(2, 0)] != 0.0 || k[(2, 1)] != 0.0 {
            return Err(Error::Config(format!(
                "camera {}: intrinsics must be upper-triangular",
                self.name
            )));
        }
        if !(k[(0, 0)] > 0.0 && k[(1, 1)] > 0.0 && k[(2, 2)] > 0.0) {
            return Err(Error::Config(format!(
                "camera {}: focal entries must be positive",
                self.name
            )));
        }
        let r = self.rotation();
        let gram = r.transpose() * r - Matrix3::identity();
        if !gram.iter().all(|v| v.is_finite()) || gram.abs().max() > ORTHONORMAL_TOL {
            return Err(Error::Config(format!(
                "camera {}: extrinsic rotation is not orthonormal",
                self.name
            )));
        }
        if !self.extrinsics.iter().chain(k.iter()).all(|v| v.is_finite()) {
            return Err(Error::Config(format!("camera {}: non-finite parameters", self.name)));
        }
        Ok(())
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.extrinsics.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vec3 {
        self.extrinsics.column(3).into_owned()
    }

    /// Optical center in world coordinates.
    pub fn center(&self) -> Vec3 {
        -(self.rotation().transpose() * self.translation())
    }

    /// Combined 3×4 projection `K · [R | t]`.
    pub fn projection_matrix(&self) -> Matrix3x4<f64> {
        self.intrinsics * self.extrinsics
    }

    /// Projects a world point to continuous pixel coordinates. No rounding.
    pub fn project_point(&self, point: &Vec3) -> Result<Projection> {
        if !(point.x.is_finite() && point.y.is_finite() && point.z.is_finite()) {
            return Err(Error::InvalidInput("project_point: non-finite point".into()));
        }
        let h = self.intrinsics * (self.extrinsics * Vector4::new(point.x, point.y, point.z, 1.0));
        if h.z.abs() < DEGENERATE_DEPTH {
            return Err(Error::DegenerateProjection(h.z));
        }
        Ok(Projection {
            u: h.x / h.z,
            v: h.y / h.z,
            in_front: h.z > 0.0,
        })
    }

    /// Unit ray direction in world coordinates through continuous pixel `(u, v)`.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Vec3 {
        let k_inv = self
            .intrinsics
            .try_inverse()
            .expect("validated intrinsics are invertible");
        let cam = k_inv * Vec3::new(u, v, 1.0);
        (self.rotation().transpose() * cam).normalize()
    }

    /// Camera seeing the scene after the world is rigidly moved by
    /// `p' = center + R (p - center)`, where `R` is the rotation of `rotation`.
    ///
    /// The returned camera images `p'` exactly where `self` imaged `p`.
    pub fn with_world_rotation(&self, rotation: &Quaternion, center: &Vec3) -> Self {
        let r = rotation.to_rotation_matrix();
        // Inverse motion: p = center + R^T (p' - center).
        let new_rot = self.rotation() * r.transpose();
        let new_t = self.translation() + self.rotation() * (center - r.transpose() * center);
        Self {
            extrinsics: compose_extrinsics(&new_rot, &new_t),
            ..self.clone()
        }
    }
}

fn compose_extrinsics(rotation: &Matrix3<f64>, translation: &Vec3) -> Matrix3x4<f64> {
    let mut e = Matrix3x4::zeros();
    e.fixed_view_mut::<3, 3>(0, 0).copy_from(rotation);
    e.set_column(3, translation);
    e
}

/// On-disk camera record: row-major matrices, pixel image size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct CameraRecord {
    pub name: String,
    pub intrinsics: [f64; 9],
    pub extrinsics: [f64; 12],
    pub width: u32,
    pub height: u32,
}

impl TryFrom<CameraRecord> for CameraModel {
    type Error = Error;

    fn try_from(r: CameraRecord) -> Result<Self> {
        CameraModel::new(
            r.name,
            Matrix3::from_row_slice(&r.intrinsics),
            Matrix3x4::from_row_slice(&r.extrinsics),
            r.width,
            r.height,
        )
    }
}

impl From<&CameraModel> for CameraRecord {
    fn from(c: &CameraModel) -> Self {
        let mut intrinsics = [0.0; 9];
        let mut extrinsics = [0.0; 12];
        for row in 0..3 {
            for col in 0..3 {
                intrinsics[row * 3 + col] = c.intrinsics[(row, col)];
            }
            for col in 0..4 {
                extrinsics[row * 4 + col] = c.extrinsics[(row, col)];
            }
        }
        Self {
            name: c.name.clone(),
            intrinsics,
            extrinsics,
            width: c.width,
            height: c.height,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_camera() -> CameraModel {
        CameraModel::new("id", Matrix3::identity(), Matrix3x4::identity(), 640, 480).unwrap()
    }

    fn pinhole(f: f64, cx: f64, cy: f64) -> CameraModel {
        let k = Matrix3::new(f, 0.0, cx, 0.0, f, cy, 0.0, 0.0, 1.0);
        CameraModel::new("pinhole", k, Matrix3x4::identity(), 640, 480).unwrap()
    }

    #[test]
    fn projects_on_axis_point_to_origin() {
        let p = identity_camera().project_point(&Vec3::new(0.0, 0.0, 1000.0)).unwrap();
        assert_eq!((p.u, p.v, p.in_front), (0.0, 0.0, true));
    }

    #[test]
    fn behind_camera_is_flagged() {
        let p = identity_camera().project_point(&Vec3::new(0.0, 0.0, -1000.0)).unwrap();
        assert!(!p.in_front);
    }

    #[test]
    fn focal_and_principal_point() {
        let p = pinhole(1000.0, 320.0, 240.0)
            .project_point(&Vec3::new(100.0, 0.0, 1000.0))
            .unwrap();
        assert!((p.u - 420.0).abs() < 1e-12);
        assert!((p.v - 240.0).abs() < 1e-12);
    }

    #[test]
    fn image_plane_point_is_degenerate() {
        let err = identity_camera().project_point(&Vec3::new(5.0, 1.0, 0.0));
        assert!(matches!(err, Err(Error::DegenerateProjection(_))));
        assert!(identity_camera()
            .project_point(&Vec3::new(f64::NAN, 0.0, 1.0))
            .is_err());
    }

    #[test]
    fn points_on_one_ray_share_pixel() {
        let cam = pinhole(800.0, 320.0, 240.0);
        let p = Vec3::new(120.0, -75.0, 900.0);
        let base = cam.project_point(&p).unwrap();
        for s in [0.01, 0.5, 2.0, 37.0, 1e4] {
            let q = cam.project_point(&(p * s)).unwrap();
            assert!((q.u - base.u).abs() < 1e-9 && (q.v - base.v).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut k = Matrix3::identity();
        k[(1, 0)] = 0.5;
        assert!(CameraModel::new("a", k, Matrix3x4::identity(), 10, 10).is_err());
        let mut e = Matrix3x4::identity();
        e[(0, 0)] = 2.0;
        assert!(CameraModel::new("b", Matrix3::identity(), e, 10, 10).is_err());
        let mut k = Matrix3::identity();
        k[(0, 0)] = -1.0;
        assert!(CameraModel::new("c", k, Matrix3x4::identity(), 10, 10).is_err());
        assert!(CameraModel::new("d", Matrix3::identity(), Matrix3x4::identity(), 0, 10).is_err());
    }

    #[test]
    fn look_at_centers_target() {
        let cam = CameraModel::look_at(
            "ring",
            Vec3::new(4000.0, 0.0, 1500.0),
            Vec3::new(0.0, 0.0, 1000.0),
            Vec3::z(),
            600.0,
            641,
            481,
        )
        .unwrap();
        let p = cam.project_point(&Vec3::new(0.0, 0.0, 1000.0)).unwrap();
        assert!((p.u - 320.0).abs() < 1e-9 && (p.v - 240.0).abs() < 1e-9 && p.in_front);
        // Higher points appear higher in the image (smaller v).
        let above = cam.project_point(&Vec3::new(0.0, 0.0, 1500.0)).unwrap();
        assert!(above.v < p.v);
        assert!((cam.center() - Vec3::new(4000.0, 0.0, 1500.0)).norm() < 1e-9);
        let ray = cam.pixel_ray(p.u, p.v);
        let expected = (Vec3::new(0.0, 0.0, 1000.0) - cam.center()).normalize();
        assert!((ray - expected).norm() < 1e-12);
    }

    #[test]
    fn world_rotation_moves_image_consistently() {
        let cam = CameraModel::look_at(
            "c",
            Vec3::new(3000.0, 500.0, 1200.0),
            Vec3::zeros(),
            Vec3::z(),
            700.0,
            640,
            480,
        )
        .unwrap();
        let center = Vec3::new(10.0, -20.0, 900.0);
        let q = super::super::vertical_axis_quaternion(0.8);
        let rotated_cam = cam.with_world_rotation(&q, &center);
        rotated_cam.validate().unwrap();
        let p = Vec3::new(150.0, -300.0, 400.0);
        let p_rot = center + q.rotate(&(p - center));
        let a = cam.project_point(&p).unwrap();
        let b = rotated_cam.project_point(&p_rot).unwrap();
        assert!((a.u - b.u).abs() < 1e-9 && (a.v - b.v).abs() < 1e-9);
    }

    #[test]
    fn record_round_trip_is_row_major() {
        let cam = pinhole(900.0, 300.0, 200.0);
        let record = CameraRecord::from(&cam);
        assert_eq!(record.intrinsics[2], 300.0);
        assert_eq!(record.intrinsics[5], 200.0);
        let back = CameraModel::try_from(record).unwrap();
        assert_eq!(back, cam);
    }
}
