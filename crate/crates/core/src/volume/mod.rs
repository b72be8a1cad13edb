//! Multi-channel occupancy volumes carved from binary silhouettes.

mod augment;
mod build;
mod grids;
mod hull;
mod silhouette;

pub use augment::{derive_seed, random_shut, rotate_scene, sample_rotation_angle, RotatedScene};
pub use build::{build_channel, build_multichannel, center_grid_on, estimate_subject_center, rig_focus};
pub use grids::{MultiChannelVolume, VoxelGrid};
pub use hull::{occupancy_centroid, visual_hull};
pub use silhouette::{SilhouetteImage, FOREGROUND_THRESHOLD};
