use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::Pose;
use crate::geometry::Vec3;

/// Poses keyed by frame id.
pub type PoseSequence = BTreeMap<u64, Pose>;

#[derive(Debug, Serialize, Deserialize)]
struct PoseRow {
    frame: u64,
    joint: String,
    x_mm: f64,
    y_mm: f64,
    z_mm: f64,
}

/// Reads `frame,joint,x_mm,y_mm,z_mm` rows. Joint order within a frame is
/// the order rows appear; a joint repeated within a frame is an error.
pub fn read_pose_csv(path: &Path) -> Result<PoseSequence> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let mut frames: BTreeMap<u64, (Vec<String>, Vec<Vec3>)> = BTreeMap::new();
    for (line, row) in reader.deserialize::<PoseRow>().enumerate() {
        let row = row.map_err(csv_err)?;
        let (names, joints) = frames.entry(row.frame).or_default();
        if names.contains(&row.joint) {
            return Err(Error::Format(format!(
                "{}: row {}: joint {} repeated in frame {}",
                path.display(),
                line + 2,
                row.joint,
                row.frame
            )));
        }
        names.push(row.joint);
        joints.push(Vec3::new(row.x_mm, row.y_mm, row.z_mm));
    }
    frames
        .into_iter()
        .map(|(frame, (names, joints))| {
            Pose::new(names, joints)
                .map(|p| (frame, p))
                .map_err(|e| Error::Format(format!("{}: frame {frame}: {e}", path.display())))
        })
        .collect()
}

pub fn write_pose_csv(path: &Path, poses: &PoseSequence) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    for (&frame, pose) in poses {
        for (name, j) in pose.joint_names.iter().zip(&pose.joints) {
            writer
                .serialize(PoseRow {
                    frame,
                    joint: name.clone(),
                    x_mm: j.x,
                    y_mm: j.y,
                    z_mm: j.z,
                })
                .map_err(csv_err)?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("CSV: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_exact(coords in prop::collection::vec(-5000.0f64..5000.0, 3..30), frames in 1u64..4) {
            let joints: Vec<Vec3> = coords.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
            let pose = Pose::unnamed(joints).unwrap();
            let seq: PoseSequence = (0..frames).map(|f| (f * 7, pose.clone())).collect();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.csv");
            write_pose_csv(&path, &seq).unwrap();
            prop_assert_eq!(read_pose_csv(&path).unwrap(), seq);
        }
    }

    #[test]
    fn header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "frame,joint,x_mm,y_mm,z_mm\n3,head,1,2,3\n1,pelvis,0,0,950\n3,neck,4,5,6\n").unwrap();
        let seq = read_pose_csv(&path).unwrap();
        assert_eq!(seq.keys().copied().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(seq[&3].joint_names, vec!["head", "neck"]);
        assert_eq!(seq[&3].joints[1], Vec3::new(4.0, 5.0, 6.0));
    }

    #[test]
    fn malformed_rows_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "frame,joint,x_mm,y_mm,z_mm\n0,a,1,2\n").unwrap();
        assert!(matches!(read_pose_csv(&path), Err(Error::Format(_))));
        std::fs::write(&path, "frame,joint,x_mm,y_mm,z_mm\n0,a,1,2,3\n0,a,1,2,3\n").unwrap();
        assert!(matches!(read_pose_csv(&path), Err(Error::Format(_))));
        std::fs::write(&path, "frame,joint,x_mm,y_mm,z_mm\n0,a,1,nan,3\n").unwrap();
        assert!(read_pose_csv(&path).is_err());
    }
}
