//! IMU orientation CSV.
//!
//! ```text
//! # frame=local
//! # calib,imu_index,l2g_w,l2g_x,l2g_y,l2g_z,wear_w,wear_x,wear_y,wear_z
//! # calib,0,1,0,0,0,1,0,0,0
//! frame,imu_index,w,x,y,z
//! 0,0,1,0,0,0
//! ```
//!
//! `frame=global` rows are bone orientations used as is. `frame=local` rows
//! are raw sensor readings calibrated with the per-sensor `calib` constants;
//! a row may override them with optional `l2g_*` / `wear_*` columns.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{imu_apply_wear_offset, imu_local_to_global, Quaternion};
use crate::synth::ImuCalibration;

use super::poses::csv_err;

const UNIT_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImuFrameKind {
    Local,
    Global,
}

/// Calibrated bone orientations per frame, ordered by IMU index.
#[derive(Clone, Debug, PartialEq)]
pub struct ImuSequence {
    pub kind: ImuFrameKind,
    pub calibration: Option<ImuCalibration>,
    pub frames: BTreeMap<u64, Vec<Quaternion>>,
}

#[derive(Debug, Deserialize)]
struct ImuRow {
    frame: u64,
    imu_index: usize,
    w: f64,
    x: f64,
    y: f64,
    z: f64,
    #[serde(default)]
    l2g_w: Option<f64>,
    #[serde(default)]
    l2g_x: Option<f64>,
    #[serde(default)]
    l2g_y: Option<f64>,
    #[serde(default)]
    l2g_z: Option<f64>,
    #[serde(default)]
    wear_w: Option<f64>,
    #[serde(default)]
    wear_x: Option<f64>,
    #[serde(default)]
    wear_y: Option<f64>,
    #[serde(default)]
    wear_z: Option<f64>,
}

fn unit(w: f64, x: f64, y: f64, z: f64, what: &str) -> Result<Quaternion> {
    let q = Quaternion::new(w, x, y, z);
    if !q.is_finite() || (q.norm() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Format(format!("{what}: quaternion [{w}, {x}, {y}, {z}] is not unit")));
    }
    Ok(q.normalized())
}

fn optional_quat(parts: [Option<f64>; 4], what: &str) -> Result<Option<Quaternion>> {
    match parts {
        [None, None, None, None] => Ok(None),
        [Some(w), Some(x), Some(y), Some(z)] => unit(w, x, y, z, what).map(Some),
        _ => Err(Error::Format(format!("{what}: partial override"))),
    }
}

fn parse_header(text: &str, path: &Path) -> Result<(ImuFrameKind, Option<ImuCalibration>)> {
    let mut kind = None;
    let mut calib: BTreeMap<usize, (Quaternion, Quaternion)> = BTreeMap::new();
    for line in text.lines().map(str::trim).take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("frame=") {
            kind = Some(match v.trim() {
                "local" => ImuFrameKind::Local,
                "global" => ImuFrameKind::Global,
                other => {
                    return Err(Error::Format(format!("{}: unknown frame flag {other:?}", path.display())))
                }
            });
        } else if let Some(rest) = body.strip_prefix("calib,") {
            if rest.starts_with("imu_index") {
                continue;
            }
            let fields: Vec<&str> = rest.split(',').map(str::trim).collect();
            let bad = || Error::Format(format!("{}: malformed calibration line {line:?}", path.display()));
            if fields.len() != 9 {
                return Err(bad());
            }
            let idx: usize = fields[0].parse().map_err(|_| bad())?;
            let v: Vec<f64> = fields[1..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            let what = format!("{}: calibration of IMU {idx}", path.display());
            let l2g = unit(v[0], v[1], v[2], v[3], &what)?;
            let wear = unit(v[4], v[5], v[6], v[7], &what)?;
            if calib.insert(idx, (l2g, wear)).is_some() {
                return Err(Error::Format(format!("{}: IMU {idx} calibrated twice", path.display())));
            }
        }
    }
    let kind = kind.ok_or_else(|| Error::Format(format!("{}: missing `# frame=local|global` header", path.display())))?;
    if calib.is_empty() {
        return Ok((kind, None));
    }
    if calib.keys().enumerate().any(|(i, &k)| i != k) {
        return Err(Error::Format(format!(
            "{}: calibration must cover IMU indices 0..n without gaps",
            path.display()
        )));
    }
    let (local_to_global, wear) = calib.into_values().unzip();
    Ok((kind, Some(ImuCalibration { local_to_global, wear })))
}

pub fn read_imu_csv(path: &Path) -> Result<ImuSequence> {
    let text = fs::read_to_string(path)?;
    let (kind, calibration) = parse_header(&text, path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut frames: BTreeMap<u64, BTreeMap<usize, Quaternion>> = BTreeMap::new();
    for row in reader.deserialize::<ImuRow>() {
        let r = row.map_err(csv_err)?;
        let what = format!("{}: frame {} IMU {}", path.display(), r.frame, r.imu_index);
        let q = unit(r.w, r.x, r.y, r.z, &what)?;
        let bone = match kind {
            ImuFrameKind::Global => q,
            ImuFrameKind::Local => {
                let l2g = optional_quat([r.l2g_w, r.l2g_x, r.l2g_y, r.l2g_z], &what)?;
                let wear = optional_quat([r.wear_w, r.wear_x, r.wear_y, r.wear_z], &what)?;
                let base = calibration.as_ref().and_then(|c| {
                    Some((*c.local_to_global.get(r.imu_index)?, *c.wear.get(r.imu_index)?))
                });
                let (l2g, wear) = match (l2g, wear, base) {
                    (Some(l), Some(w), _) => (l, w),
                    (l, w, Some((bl, bw))) => (l.unwrap_or(bl), w.unwrap_or(bw)),
                    _ => return Err(Error::Format(format!("{what}: no calibration for local reading"))),
                };
                imu_apply_wear_offset(&wear, &imu_local_to_global(&q, &l2g))
            }
        };
        if frames.entry(r.frame).or_default().insert(r.imu_index, bone).is_some() {
            return Err(Error::Format(format!("{what}: duplicate row")));
        }
    }
    let frames = frames
        .into_iter()
        .map(|(frame, by_index)| {
            if by_index.keys().enumerate().any(|(i, &k)| i != k) {
                return Err(Error::Format(format!(
                    "{}: frame {frame}: IMU indices must be 0..n without gaps",
                    path.display()
                )));
            }
            Ok((frame, by_index.into_values().collect()))
        })
        .collect::<Result<_>>()?;
    Ok(ImuSequence {
        kind,
        calibration,
        frames,
    })
}

/// Writes bone orientations. With a calibration the file holds the raw local
/// readings that calibrate back to `frames`; otherwise global orientations.
pub fn write_imu_csv(
    path: &Path,
    frames: &BTreeMap<u64, Vec<Quaternion>>,
    calibration: Option<&ImuCalibration>,
) -> Result<()> {
    let mut out = String::new();
    match calibration {
        None => out.push_str("# frame=global\n"),
        Some(c) => {
            out.push_str("# frame=local\n# calib,imu_index,l2g_w,l2g_x,l2g_y,l2g_z,wear_w,wear_x,wear_y,wear_z\n");
            for (i, (l, w)) in c.local_to_global.iter().zip(&c.wear).enumerate() {
                writeln!(out, "# calib,{i},{},{},{},{},{},{},{},{}", l.w, l.x, l.y, l.z, w.w, w.x, w.y, w.z)
                    .expect("writing to a String");
            }
        }
    }
    out.push_str("frame,imu_index,w,x,y,z\n");
    for (&frame, bones) in frames {
        let rows = match calibration {
            Some(c) => {
                if c.wear.len() < bones.len() {
                    return Err(Error::InvalidInput(format!(
                        "calibration covers {} IMUs, frame {frame} has {}",
                        c.wear.len(),
                        bones.len()
                    )));
                }
                c.local_readings(bones)
            }
            None => bones.clone(),
        };
        for (i, q) in rows.iter().enumerate() {
            writeln!(out, "{frame},{i},{},{},{},{}", q.w, q.x, q.y, q.z).expect("writing to a String");
        }
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn close(a: &Quaternion, b: &Quaternion) -> bool {
        a.rotation_distance(b) < 1e-9
    }

    fn sample_frames() -> BTreeMap<u64, Vec<Quaternion>> {
        (0..4u64)
            .map(|f| {
                let qs = (0..3)
                    .map(|i| Quaternion::from_axis_angle(Vec3::new(1.0, i as f64, 0.5), 0.3 * (f + i) as f64))
                    .collect();
                (f, qs)
            })
            .collect()
    }

    #[test]
    fn global_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imu.csv");
        write_imu_csv(&path, &sample_frames(), None).unwrap();
        let seq = read_imu_csv(&path).unwrap();
        assert_eq!(seq.kind, ImuFrameKind::Global);
        for (f, qs) in sample_frames() {
            for (a, b) in seq.frames[&f].iter().zip(&qs) {
                assert!(close(a, b));
            }
        }
    }

    #[test]
    fn local_readings_calibrate_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imu.csv");
        let calib = ImuCalibration::random(5, 3);
        write_imu_csv(&path, &sample_frames(), Some(&calib)).unwrap();
        let seq = read_imu_csv(&path).unwrap();
        assert_eq!(seq.kind, ImuFrameKind::Local);
        assert_eq!(seq.calibration.as_ref().unwrap().wear.len(), 3);
        for (f, qs) in sample_frames() {
            for (a, b) in seq.frames[&f].iter().zip(&qs) {
                assert!(close(a, b));
            }
        }
    }

    #[test]
    fn per_row_override_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imu.csv");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let text = format!(
            "# frame=local\n# calib,0,1,0,0,0,1,0,0,0\n\
             frame,imu_index,w,x,y,z,l2g_w,l2g_x,l2g_y,l2g_z,wear_w,wear_x,wear_y,wear_z\n\
             0,0,1,0,0,0,,,,,,,,\n\
             1,0,1,0,0,0,{h},0,0,{h},,,,\n"
        );
        fs::write(&path, text).unwrap();
        let seq = read_imu_csv(&path).unwrap();
        assert!(close(&seq.frames[&0][0], &Quaternion::IDENTITY));
        let quarter = Quaternion::new(h, 0.0, 0.0, h);
        assert!(close(&seq.frames[&1][0], &quarter));
    }

    #[test]
    fn header_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("imu.csv");
        fs::write(&path, "frame,imu_index,w,x,y,z\n0,0,1,0,0,0\n").unwrap();
        assert!(matches!(read_imu_csv(&path), Err(Error::Format(_))));
        fs::write(&path, "# frame=local\nframe,imu_index,w,x,y,z\n0,0,1,0,0,0\n").unwrap();
        assert!(matches!(read_imu_csv(&path), Err(Error::Format(_))));
        fs::write(&path, "# frame=global\nframe,imu_index,w,x,y,z\n0,0,2,0,0,0\n").unwrap();
        assert!(matches!(read_imu_csv(&path), Err(Error::Format(_))));
        fs::write(&path, "# frame=global\nframe,imu_index,w,x,y,z\n0,1,1,0,0,0\n").unwrap();
        assert!(matches!(read_imu_csv(&path), Err(Error::Format(_))));
    }
}
