use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fusion::SkeletonTopology;
use crate::geometry::camera::CameraRecord;
use crate::geometry::CameraModel;

/// Reads a JSON array of camera records and validates each one.
pub fn read_cameras(path: &Path) -> Result<Vec<CameraModel>> {
    let records: Vec<CameraRecord> = serde_json::from_str(&fs::read_to_string(path)?)?;
    if records.is_empty() {
        return Err(Error::Config(format!("{}: no cameras", path.display())));
    }
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            CameraModel::try_from(r).map_err(|e| Error::Config(format!("{}: camera {i}: {e}", path.display())))
        })
        .collect()
}

pub fn write_cameras(path: &Path, cameras: &[CameraModel]) -> Result<()> {
    let records: Vec<CameraRecord> = cameras.iter().map(CameraRecord::from).collect();
    fs::write(path, serde_json::to_string_pretty(&records)?)?;
    Ok(())
}

/// Reads the IMU-to-bone table. Canonical directions are normalized.
pub fn read_topology(path: &Path) -> Result<SkeletonTopology> {
    let raw: SkeletonTopology = serde_json::from_str(&fs::read_to_string(path)?)?;
    for (i, e) in raw.entries.iter().enumerate() {
        if e.imu_index != i {
            return Err(Error::Config(format!(
                "{}: entry {i} has imu_index {}; entries must be listed in channel order",
                path.display(),
                e.imu_index
            )));
        }
    }
    SkeletonTopology::new(raw.entries)
}

pub fn write_topology(path: &Path, topology: &SkeletonTopology) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(topology)?)?;
    Ok(())
}
