use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use voxfuse::io::read_pose_csv;
use voxfuse::metrics::{mpjpe, per_frame_report, procrustes_align, render_text, FrameReport, FrameResult};
use voxfuse::Pose;

use crate::config::RunConfig;
use crate::manifest::Manifest;
use crate::{create_dir, required, write_json};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Predicted poses, CSV.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth poses, CSV.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Also report error after similarity (Procrustes) alignment per frame.
    #[arg(long)]
    pub pa: bool,
    /// `voxelize` manifest splitting frames into full (seen by every camera) and partial.
    #[arg(long)]
    pub frame_classes: Option<PathBuf>,
    /// Output directory for report.json, report.txt and per_frame.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    joint_names: Vec<String>,
    mpjpe: FrameReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pa_mpjpe: Option<FrameReport>,
}

/// `pred` with joints reordered to match `gt` by name.
fn match_joints(pred: &Pose, gt: &Pose) -> Result<Pose> {
    let index: BTreeMap<&str, usize> = pred.joint_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    if pred.len() != gt.len() {
        bail!("{} predicted joints, {} ground-truth joints", pred.len(), gt.len());
    }
    let joints = gt
        .joint_names
        .iter()
        .map(|name| {
            index
                .get(name.as_str())
                .map(|&i| pred.joints[i])
                .with_context(|| format!("joint {name} missing from the prediction"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pose::new(gt.joint_names.clone(), joints)?)
}

fn list(frames: &[u64]) -> String {
    frames.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
}

pub fn run(args: &EvalArgs, mut cfg: RunConfig) -> Result<Vec<String>> {
    if let Some(v) = &args.gt {
        cfg.paths.gt = Some(v.clone());
    }
    if let Some(v) = &args.out {
        cfg.paths.output = Some(v.clone());
    }
    cfg.validate()?;
    let out = required(&cfg.paths.output, "output directory")?.clone();
    let pred = read_pose_csv(&args.pred)?;
    let gt = read_pose_csv(required(&cfg.paths.gt, "ground-truth file")?)?;

    let missing: Vec<u64> = gt.keys().filter(|f| !pred.contains_key(f)).copied().collect();
    let extra: Vec<u64> = pred.keys().filter(|f| !gt.contains_key(f)).copied().collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("frame sets differ");
        if !missing.is_empty() {
            let _ = write!(msg, "; missing from prediction: {}", list(&missing));
        }
        if !extra.is_empty() {
            let _ = write!(msg, "; missing from ground truth: {}", list(&extra));
        }
        bail!(msg);
    }

    let classes: Option<BTreeMap<u64, bool>> = match &args.frame_classes {
        Some(path) => {
            let m = Manifest::load(path)?;
            Some(m.frames.iter().map(|f| (f.frame, f.full_frame)).collect())
        }
        None => None,
    };

    let mut errors = Vec::new();
    let mut plain = Vec::new();
    let mut aligned = Vec::new();
    for (&n, g) in &gt {
        let frame = || -> Result<(FrameResult, Option<FrameResult>)> {
            let full = match &classes {
                Some(c) => *c.get(&n).context("not listed in the frame-class manifest")?,
                None => true,
            };
            let p = match_joints(&pred[&n], g)?;
            let (_, per_joint) = mpjpe(&p, g)?;
            let pa = if args.pa {
                let (a, _) = procrustes_align(&p, g)?;
                Some(FrameResult::new(n, mpjpe(&a, g)?.1, full)?)
            } else {
                None
            };
            Ok((FrameResult::new(n, per_joint, full)?, pa))
        };
        match frame() {
            Ok((r, pa)) => {
                plain.push(r);
                aligned.extend(pa);
            }
            Err(e) => errors.push(format!("frame {n}: {e:#}")),
        }
    }
    if plain.is_empty() {
        bail!("no frame could be evaluated");
    }

    let joint_names = gt.values().next().expect("non-empty").joint_names.clone();
    let report = Report {
        mpjpe: per_frame_report(&plain)?,
        pa_mpjpe: if args.pa { Some(per_frame_report(&aligned)?) } else { None },
        joint_names,
    };
    create_dir(&out)?;
    write_json(&out.join("report.json"), &report)?;

    let mut text = render_text(&report.mpjpe, "MPJPE", &report.joint_names);
    if let Some(pa) = &report.pa_mpjpe {
        text.push('\n');
        text.push_str(&render_text(pa, "PA-MPJPE", &report.joint_names));
    }
    fs::write(out.join("report.txt"), text)?;

    let mut csv = String::from(if args.pa {
        "frame,full_frame,mpjpe_mm,pa_mpjpe_mm\n"
    } else {
        "frame,full_frame,mpjpe_mm\n"
    });
    let pa_series: BTreeMap<u64, f64> = report
        .pa_mpjpe
        .iter()
        .flat_map(|r| r.series.iter().map(|s| (s.frame_id, s.mean_error)))
        .collect();
    for s in &report.mpjpe.series {
        let _ = write!(csv, "{},{},{}", s.frame_id, u8::from(s.full_frame), s.mean_error);
        if let Some(pa) = pa_series.get(&s.frame_id) {
            let _ = write!(csv, ",{pa}");
        }
        csv.push('\n');
    }
    fs::write(out.join("per_frame.csv"), csv)?;
    Ok(errors)
}
