//! Geometric and differentiable building blocks for multi-view + IMU 3D
//! human pose estimation.
//!
//! * [`geometry`]: pinhole projection, quaternion algebra, IMU frame transforms
//!   and voxel grid anchoring.
//! * [`volume`]: per-camera occupancy channels carved from binary silhouettes,
//!   plus the vertical-rotation and channel-dropout augmentations.
//! * [`fusion`]: 3D soft-argmax with its analytic Jacobian, IMU-bone cylinder
//!   volumes, refinement-input concatenation and the two-stage loss.
//! * [`metrics`]: MPJPE, Procrustes-aligned MPJPE and per-frame reports.
//! * [`synth`]: synthetic articulated scenes and brute-force references.
//! * [`io`]: the binary and text file formats shared with the CLI.

pub mod error;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod synth;
pub mod volume;

pub use error::{Error, Result};
pub use fusion::{HeatmapVolume, Pose, SkeletonTopology, SoftArgmaxParams, TopologyEntry};
pub use geometry::{CameraModel, GridSpec, Quaternion, Vec3};
pub use volume::{MultiChannelVolume, SilhouetteImage, VoxelGrid};
