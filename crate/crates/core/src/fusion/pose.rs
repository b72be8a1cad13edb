use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Joint positions of one frame, world mm.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose {
    pub joint_names: Vec<String>,
    pub joints: Vec<Vec3>,
}

impl Pose {
    pub fn new(joint_names: Vec<String>, joints: Vec<Vec3>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::InvalidInput("pose needs at least one joint".into()));
        }
        if joint_names.len() != joints.len() {
            return Err(Error::InvalidInput(format!(
                "{} joint names for {} joints",
                joint_names.len(),
                joints.len()
            )));
        }
        if !joints.iter().all(|j| j.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidInput("pose has non-finite coordinates".into()));
        }
        Ok(Self {
            joint_names,
            joints,
        })
    }

    /// Joints labelled by their index.
    pub fn unnamed(joints: Vec<Vec3>) -> Result<Self> {
        let names = (0..joints.len()).map(|i| i.to_string()).collect();
        Self::new(names, joints)
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn map_joints(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self {
            joint_names: self.joint_names.clone(),
            joints: self.joints.iter().map(f).collect(),
        }
    }

    pub(crate) fn check_same_count(&self, other: &Pose) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::InvalidInput(format!(
                "joint count mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// One IMU's attachment: the joint its bone starts from and the bone
/// direction expressed in the sensor frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyEntry {
    pub imu_index: usize,
    pub imu_name: String,
    pub proximal_joint: usize,
    pub canonical_direction: Vec3,
    /// Joint at the far end of the bone, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distal_joint: Option<usize>,
}

/// IMU-to-bone mapping, ordered by channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SkeletonTopology {
    pub entries: Vec<TopologyEntry>,
}

impl SkeletonTopology {
    /// Takes entries as given, normalizing canonical directions.
    pub fn new(mut entries: Vec<TopologyEntry>) -> Result<Self> {
        for e in &mut entries {
            let n = e.canonical_direction.norm();
            if !(n.is_finite() && n > 1e-9) {
                return Err(Error::InvalidInput(format!(
                    "IMU {}: canonical direction must be non-zero",
                    e.imu_name
                )));
            }
            e.canonical_direction /= n;
        }
        Ok(Self { entries })
    }

    /// Canonical directions taken as the unit proximal→distal vectors of a
    /// reference pose. `limbs` lists `(imu_name, proximal, distal)` per IMU.
    pub fn from_reference_pose(limbs: &[(&str, usize, usize)], reference: &Pose) -> Result<Self> {
        let entries = limbs
            .iter()
            .enumerate()
            .map(|(imu_index, &(name, proximal, distal))| {
                let (Some(a), Some(b)) = (reference.joints.get(proximal), reference.joints.get(distal))
                else {
                    return Err(Error::InvalidInput(format!(
                        "IMU {name}: joint index out of range for the reference pose"
                    )));
                };
                Ok(TopologyEntry {
                    imu_index,
                    imu_name: name.to_string(),
                    proximal_joint: proximal,
                    canonical_direction: b - a,
                    distal_joint: Some(distal),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate_for(&self, joint_count: usize) -> Result<()> {
        for e in &self.entries {
            if e.proximal_joint >= joint_count {
                return Err(Error::InvalidInput(format!(
                    "IMU {}: proximal joint {} out of range for {} joints",
                    e.imu_name, e.proximal_joint, joint_count
                )));
            }
            if (e.canonical_direction.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "IMU {}: canonical direction is not unit length",
                    e.imu_name
                )));
            }
        }
        Ok(())
    }
}
