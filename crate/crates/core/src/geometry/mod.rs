//! Camera projection, quaternion algebra and voxel grid anchoring.
//!
//! Conventions used throughout the crate:
//! * world frame is right-handed with +Z up, units are millimeters;
//! * quaternions are Hamilton, scalar-first `(w, x, y, z)`;
//! * camera extrinsics map world coordinates into the camera frame.

pub(crate) mod camera;
mod grid;
mod quaternion;

pub use camera::{CameraModel, Projection};
pub use grid::GridSpec;
pub use quaternion::{
    imu_apply_wear_offset, imu_local_to_global, vertical_axis_quaternion, Quaternion,
};

/// World-space point or direction.
pub type Vec3 = nalgebra::Vector3<f64>;

/// World vertical axis.
pub const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);
