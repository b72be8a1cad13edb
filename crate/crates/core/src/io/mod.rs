//! File formats shared by the library and the CLI.
//!
//! Binary formats are little-endian with a four-byte magic:
//!
//! * `MCV1` volume: `u32 [channels, nx, ny, nz]`, `f32 [origin x, y, z,
//!   voxel_size]`, then one `u8` per voxel, channel-major and x-fastest.
//! * `HM3D` heatmaps: `u32 [nx, ny, nz, joint_count]`, `f32 [origin x, y, z,
//!   voxel_size]`, then `f32` scores, joint-major and x-fastest.

mod binary;
mod cameras;
mod images;
mod imu;
mod poses;

pub use binary::{read_heatmaps, read_volume, write_heatmaps, write_volume};
pub use cameras::{read_cameras, read_topology, write_cameras, write_topology};
pub use images::{read_silhouette, write_pgm};
pub use imu::{read_imu_csv, write_imu_csv, ImuFrameKind, ImuSequence};
pub use poses::{read_pose_csv, write_pose_csv, PoseSequence};
