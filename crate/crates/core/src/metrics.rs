//! Pose error metrics: MPJPE, Procrustes-aligned MPJPE and per-frame reports
//! with the full/partial frame split.

use std::fmt::Write as _;

use nalgebra::Matrix3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::Pose;
use crate::geometry::Vec3;

/// Mean and per-joint Euclidean errors, mm.
pub fn mpjpe(pred: &Pose, gt: &Pose) -> Result<(f64, Vec<f64>)> {
    pred.check_same_count(gt)?;
    let per_joint: Vec<f64> = pred
        .joints
        .iter()
        .zip(&gt.joints)
        .map(|(p, g)| (p - g).norm())
        .collect();
    let mean = per_joint.iter().sum::<f64>() / per_joint.len() as f64;
    Ok((mean, per_joint))
}

/// `p ↦ scale · rotation · p + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub rotation: Matrix3<f64>,
    pub scale: f64,
    pub translation: Vec3,
}

impl Similarity {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            scale: 1.0,
            translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p * self.scale + self.translation
    }
}

/// Least-squares similarity taking `pred` onto `gt` (closed form from the SVD
/// of the cross-covariance, reflections excluded), and the aligned pose.
pub fn procrustes_align(pred: &Pose, gt: &Pose) -> Result<(Pose, Similarity)> {
    pred.check_same_count(gt)?;
    let k = pred.len();
    if k < 3 {
        return Err(Error::RankDeficient(format!("{k} joints; need at least 3")));
    }
    let n = k as f64;
    let mu_p = pred.joints.iter().sum::<Vec3>() / n;
    let mu_g = gt.joints.iter().sum::<Vec3>() / n;

    let mut cross = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    let mut var_p = 0.0;
    for (p, g) in pred.joints.iter().zip(&gt.joints) {
        let dp = p - mu_p;
        let dg = g - mu_g;
        cross += dg * dp.transpose();
        spread += dp * dp.transpose();
        var_p += dp.norm_squared();
    }
    cross /= n;
    var_p /= n;

    let sv = spread.singular_values();
    let (s_max, s_mid) = (sv.max(), {
        let mut s = [sv[0], sv[1], sv[2]];
        s.sort_by(|a, b| b.total_cmp(a));
        s[1]
    });
    if !(s_max > 0.0) || s_mid <= 1e-12 * s_max {
        return Err(Error::RankDeficient(
            "predicted joints are coincident or collinear".into(),
        ));
    }

    let svd = cross.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let reflect = if (u.determinant() * v_t.determinant()) < 0.0 { -1.0 } else { 1.0 };
    let signs = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, reflect));
    let rotation = u * signs * v_t;
    let trace: f64 = (0..3)
        .map(|i| svd.singular_values[i] * signs[(i, i)])
        .sum();
    let scale = trace / var_p;
    let translation = mu_g - rotation * mu_p * scale;
    let similarity = Similarity {
        rotation,
        scale,
        translation,
    };
    Ok((pred.map_joints(|p| similarity.apply(p)), similarity))
}

/// MPJPE after Procrustes alignment of `pred` onto `gt`.
pub fn pa_mpjpe(pred: &Pose, gt: &Pose) -> Result<f64> {
    let (aligned, _) = procrustes_align(pred, gt)?;
    Ok(mpjpe(&aligned, gt)?.0)
}

/// Per-frame evaluation outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameResult {
    pub frame_id: u64,
    pub per_joint_error: Vec<f64>,
    pub mean_error: f64,
    /// Subject visible in every camera.
    pub full_frame: bool,
}

impl FrameResult {
    pub fn new(frame_id: u64, per_joint_error: Vec<f64>, full_frame: bool) -> Result<Self> {
        if per_joint_error.is_empty() {
            return Err(Error::InvalidInput(format!("frame {frame_id}: no joint errors")));
        }
        if per_joint_error.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "frame {frame_id}: joint errors must be non-negative"
            )));
        }
        let mean_error = per_joint_error.iter().sum::<f64>() / per_joint_error.len() as f64;
        Ok(Self {
            frame_id,
            per_joint_error,
            mean_error,
            full_frame,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub frame_id: u64,
    pub mean_error: f64,
    pub full_frame: bool,
}

/// Aggregate over a sequence of frames. Means are joint-count weighted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameReport {
    pub frames: usize,
    pub full_frames: usize,
    pub partial_frames: usize,
    pub overall_mean: f64,
    pub full_mean: Option<f64>,
    pub partial_mean: Option<f64>,
    /// Mean error of joint `i` over the frames that have it.
    pub per_joint_mean: Vec<f64>,
    /// Per-frame means sorted by frame id.
    pub series: Vec<SeriesPoint>,
}

#[derive(Default)]
struct Tally {
    sum: f64,
    count: usize,
}

impl Tally {
    fn add(&mut self, errors: &[f64]) {
        self.sum += errors.iter().sum::<f64>();
        self.count += errors.len();
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

/// Summarizes frames with the overall / full-frame / partial-frame split.
///
/// Frames are sorted before summation, so the result does not depend on
/// delivery order.
pub fn per_frame_report(results: &[FrameResult]) -> Result<FrameReport> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no frames to report".into()));
    }
    let mut sorted: Vec<&FrameResult> = results.iter().collect();
    sorted.sort_by(|a, b| {
        a.frame_id.cmp(&b.frame_id).then_with(|| {
            a.per_joint_error
                .iter()
                .zip(&b.per_joint_error)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| a.per_joint_error.len().cmp(&b.per_joint_error.len()))
        })
    });

    let (mut all, mut full, mut partial) = (Tally::default(), Tally::default(), Tally::default());
    let max_joints = sorted.iter().map(|r| r.per_joint_error.len()).max().unwrap_or(0);
    let mut joints: Vec<Tally> = (0..max_joints).map(|_| Tally::default()).collect();
    for r in &sorted {
        all.add(&r.per_joint_error);
        if r.full_frame {
            full.add(&r.per_joint_error);
        } else {
            partial.add(&r.per_joint_error);
        }
        for (tally, e) in joints.iter_mut().zip(&r.per_joint_error) {
            tally.add(std::slice::from_ref(e));
        }
    }
    let full_frames = sorted.iter().filter(|r| r.full_frame).count();
    Ok(FrameReport {
        frames: sorted.len(),
        full_frames,
        partial_frames: sorted.len() - full_frames,
        overall_mean: all.mean().expect("non-empty"),
        full_mean: full.mean(),
        partial_mean: partial.mean(),
        per_joint_mean: joints.iter().map(|t| t.mean().unwrap_or(0.0)).collect(),
        series: sorted
            .iter()
            .map(|r| SeriesPoint {
                frame_id: r.frame_id,
                mean_error: r.mean_error,
                full_frame: r.full_frame,
            })
            .collect(),
    })
}

/// Aligned-column text rendering of a report.
pub fn render_text(report: &FrameReport, label: &str, joint_names: &[String]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
    let mut out = String::new();
    let _ = writeln!(out, "{label} (mm)");
    let _ = writeln!(out, "{:<16}{:>10}{:>12}", "split", "frames", "mean");
    let _ = writeln!(out, "{:<16}{:>10}{:>12}", "full", report.full_frames, fmt(report.full_mean));
    let _ = writeln!(out, "{:<16}{:>10}{:>12}", "partial", report.partial_frames, fmt(report.partial_mean));
    let _ = writeln!(out, "{:<16}{:>10}{:>12}", "overall", report.frames, fmt(Some(report.overall_mean)));
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<16}{:>12}", "joint", "mean");
    for (i, m) in report.per_joint_mean.iter().enumerate() {
        let name = joint_names.get(i).cloned().unwrap_or_else(|| i.to_string());
        let _ = writeln!(out, "{:<16}{:>12.2}", name, m);
    }
    out
}
