//! Reference skeleton: 18 joints, 13 IMU-carrying bones.

use crate::error::Result;
use crate::fusion::{Pose, SkeletonTopology};
use crate::geometry::Vec3;

pub const JOINT_NAMES: [&str; 18] = [
    "pelvis",
    "chest",
    "neck",
    "head",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
    "l_hip",
    "l_knee",
    "l_ankle",
    "l_toe",
    "r_hip",
    "r_knee",
    "r_ankle",
    "r_toe",
];

pub const ROOT_JOINT: usize = 0;

/// `(imu_name, proximal, distal)` for every IMU, in channel order.
pub const IMU_BONES: [(&str, usize, usize); 13] = [
    ("pelvis", 0, 1),
    ("sternum", 1, 2),
    ("head", 2, 3),
    ("l_upper_arm", 4, 5),
    ("l_lower_arm", 5, 6),
    ("r_upper_arm", 7, 8),
    ("r_lower_arm", 8, 9),
    ("l_upper_leg", 10, 11),
    ("l_lower_leg", 11, 12),
    ("l_foot", 12, 13),
    ("r_upper_leg", 14, 15),
    ("r_lower_leg", 15, 16),
    ("r_foot", 16, 17),
];

/// Kinematic tree: `(joint, parent, bone)` where `bone` indexes [`IMU_BONES`]
/// and selects the rotation that carries the joint's rest offset.
pub(crate) const SEGMENTS: [(usize, usize, usize); 17] = [
    (1, 0, 0),
    (10, 0, 0),
    (14, 0, 0),
    (2, 1, 1),
    (4, 1, 1),
    (7, 1, 1),
    (3, 2, 2),
    (5, 4, 3),
    (6, 5, 4),
    (8, 7, 5),
    (9, 8, 6),
    (11, 10, 7),
    (12, 11, 8),
    (13, 12, 9),
    (15, 14, 10),
    (16, 15, 11),
    (17, 16, 12),
];

/// Capsule radius (mm) around each IMU bone.
pub(crate) const BONE_RADII: [f64; 13] = [
    130.0, 110.0, 60.0, 50.0, 40.0, 50.0, 40.0, 75.0, 55.0, 40.0, 75.0, 55.0, 40.0,
];

pub(crate) const HEAD_RADIUS: f64 = 110.0;

/// Offsets (mm) from parent to shoulder and hip joints, carried by their
/// parent bone; these get thinner connector capsules.
pub(crate) const CONNECTOR_RADIUS: f64 = 60.0;

/// Standing T-pose, pelvis at 950 mm, facing +y, +z up.
pub fn reference_pose() -> Pose {
    let joints = vec![
        Vec3::new(0.0, 0.0, 950.0),
        Vec3::new(0.0, 0.0, 1250.0),
        Vec3::new(0.0, 0.0, 1500.0),
        Vec3::new(0.0, 0.0, 1720.0),
        Vec3::new(-180.0, 0.0, 1450.0),
        Vec3::new(-460.0, 0.0, 1450.0),
        Vec3::new(-710.0, 0.0, 1450.0),
        Vec3::new(180.0, 0.0, 1450.0),
        Vec3::new(460.0, 0.0, 1450.0),
        Vec3::new(710.0, 0.0, 1450.0),
        Vec3::new(-100.0, 0.0, 900.0),
        Vec3::new(-100.0, 0.0, 480.0),
        Vec3::new(-100.0, 0.0, 80.0),
        Vec3::new(-100.0, 150.0, 20.0),
        Vec3::new(100.0, 0.0, 900.0),
        Vec3::new(100.0, 0.0, 480.0),
        Vec3::new(100.0, 0.0, 80.0),
        Vec3::new(100.0, 150.0, 20.0),
    ];
    Pose::new(JOINT_NAMES.iter().map(|s| s.to_string()).collect(), joints)
        .expect("reference pose is valid")
}

/// 13-IMU topology with canonical directions from [`reference_pose`].
pub fn default_topology() -> Result<SkeletonTopology> {
    SkeletonTopology::from_reference_pose(&IMU_BONES, &reference_pose())
}
