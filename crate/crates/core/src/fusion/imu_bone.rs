use rayon::prelude::*;

use super::{Pose, SkeletonTopology, TopologyEntry};
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Quaternion, Vec3};
use crate::volume::{MultiChannelVolume, VoxelGrid};

/// Cylinder radius in mm: one voxel of a 32³ grid spanning 2240 mm.
pub const DEFAULT_CYLINDER_RADIUS: f64 = 70.0;

const UNIT_TOL: f64 = 1e-6;

/// Euclidean distance from `point` to the half-line `start + t * dir`, `t >= 0`.
/// `dir` must be unit length.
#[inline]
pub fn distance_to_half_line(point: &Vec3, start: &Vec3, dir: &Vec3) -> f64 {
    let rel = point - start;
    let t = rel.dot(dir).max(0.0);
    (rel - dir * t).norm()
}

/// Directed bone cylinder for one IMU.
///
/// The bone leaves `estimated_joint` along the sensor's canonical direction
/// rotated by `bone_orientation`; a voxel is set iff its center is within
/// `radius` of that half-line. No bone length is assumed, so the cylinder
/// runs to the grid boundary.
pub fn imu_bone_volume(
    estimated_joint: &Vec3,
    bone_orientation: &Quaternion,
    entry: &TopologyEntry,
    radius: f64,
    spec: &GridSpec,
) -> Result<VoxelGrid> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("cylinder radius must be positive, got {radius}")));
    }
    if !bone_orientation.is_finite() || !bone_orientation.is_unit(UNIT_TOL) {
        return Err(Error::InvalidInput(format!(
            "IMU {}: bone orientation is not a unit quaternion (norm {})",
            entry.imu_name,
            bone_orientation.norm()
        )));
    }
    if !estimated_joint.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("estimated joint is not finite".into()));
    }
    spec.validate()?;
    let dir = bone_orientation.rotate(&entry.canonical_direction).normalize();
    let mut grid = VoxelGrid::empty(*spec);

    // Voxel centers span [lo, hi]; anything within `radius` of them is a
    // candidate point on the half-line.
    let half = Vec3::repeat(0.5 * spec.voxel_size);
    let lo = spec.origin + half - Vec3::repeat(radius);
    let hi = spec.max_corner() - half + Vec3::repeat(radius);
    let Some((t0, t1)) = clip_half_line(estimated_joint, &dir, &lo, &hi) else {
        return Ok(grid);
    };
    let a = estimated_joint + dir * t0;
    let b = estimated_joint + dir * t1;
    let mut range = [(0usize, 0usize); 3];
    for axis in 0..3 {
        let min = a[axis].min(b[axis]) - radius;
        let max = a[axis].max(b[axis]) + radius;
        let to_index = |w: f64| (w - spec.origin[axis]) / spec.voxel_size - 0.5;
        let first = (to_index(min).floor() - 1.0).max(0.0) as usize;
        let last = (to_index(max).ceil() + 1.0).min(spec.dims[axis] as f64 - 1.0);
        if last < first as f64 {
            return Ok(grid);
        }
        range[axis] = (first, last as usize);
    }
    for k in range[2].0..=range[2].1 {
        for j in range[1].0..=range[1].1 {
            for i in range[0].0..=range[0].1 {
                let c = spec.voxel_center(i, j, k);
                if distance_to_half_line(&c, estimated_joint, &dir) <= radius {
                    grid.set(i, j, k, true);
                }
            }
        }
    }
    Ok(grid)
}

/// Parameter interval `[t0, t1]`, `t0 >= 0`, where `start + t * dir` lies in
/// the box `[lo, hi]`.
fn clip_half_line(start: &Vec3, dir: &Vec3, lo: &Vec3, hi: &Vec3) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for axis in 0..3 {
        let s = start[axis];
        let d = dir[axis];
        if d.abs() < 1e-15 {
            if s < lo[axis] || s > hi[axis] {
                return None;
            }
            continue;
        }
        let ta = (lo[axis] - s) / d;
        let tb = (hi[axis] - s) / d;
        t0 = t0.max(ta.min(tb));
        t1 = t1.min(ta.max(tb));
    }
    // Pad by a hair so the candidate box never clips a boundary voxel.
    (t0 <= t1 + 1e-9).then_some((t0, t1.max(t0)))
}

/// One bone-cylinder channel per topology entry, in topology order.
pub fn imu_bone_stack(
    pose_estimate: &Pose,
    imu_frame: &[Quaternion],
    topology: &SkeletonTopology,
    radius: f64,
    spec: &GridSpec,
) -> Result<MultiChannelVolume> {
    if topology.is_empty() {
        return Err(Error::InvalidInput("topology has no IMU entries".into()));
    }
    if imu_frame.len() != topology.len() {
        return Err(Error::InvalidInput(format!(
            "{} IMU orientations for {} topology entries",
            imu_frame.len(),
            topology.len()
        )));
    }
    topology.validate_for(pose_estimate.len())?;
    let grids = topology
        .entries
        .par_iter()
        .zip(imu_frame.par_iter())
        .map(|(entry, q)| {
            imu_bone_volume(&pose_estimate.joints[entry.proximal_joint], q, entry, radius, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiChannelVolume::from_grids(&grids)
}
