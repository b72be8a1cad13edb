//! Differentiable and fusion-specific layers: 3D soft-argmax, IMU-bone
//! cylinder volumes, refinement-input concatenation and the two-stage loss.

mod concat;
mod heatmap;
mod imu_bone;
mod loss;
mod pose;

pub use concat::{concat_refinement_input, RefinementInput};
pub use heatmap::{
    hard_argmax_3d, soft_argmax_3d, soft_argmax_gradient, HardArgmax, HeatmapVolume, Jacobian,
    SoftArgmax, SoftArgmaxParams, DEFAULT_THETA,
};
pub use imu_bone::{distance_to_half_line, imu_bone_stack, imu_bone_volume, DEFAULT_CYLINDER_RADIUS};
pub use loss::{two_stage_loss, TwoStageLoss};
pub use pose::{Pose, SkeletonTopology, TopologyEntry};
