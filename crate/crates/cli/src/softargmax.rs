use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use regex::Regex;
use voxfuse::fusion::{hard_argmax_3d, soft_argmax_3d};
use voxfuse::io::{read_heatmaps, write_pose_csv, PoseSequence};
use voxfuse::synth::skeleton::JOINT_NAMES;
use voxfuse::{HeatmapVolume, Pose, SoftArgmaxParams};

use crate::config::RunConfig;
use crate::create_dir;

#[derive(Args, Debug)]
pub struct SoftargmaxArgs {
    /// HM3D files, or directories searched for `*.hm3d`. The frame id is the
    /// number after `frame` in the file name (or its last number).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Temperatures; several values write one CSV per value into --out [default: 3].
    #[arg(long, value_delimiter = ',', conflicts_with = "hard")]
    pub theta: Option<Vec<f64>>,
    /// Decode with hard argmax (voxel center of the maximum) instead.
    #[arg(long)]
    pub hard: bool,
    /// Joint names for the CSV [default: the 18 synthetic joints, or indices].
    #[arg(long, value_delimiter = ',')]
    pub names: Option<Vec<String>>,
    /// Output CSV, or a directory when sweeping several temperatures.
    #[arg(long)]
    pub out: PathBuf,
}

enum Decoder {
    Soft(SoftArgmaxParams),
    Hard,
}

fn frame_id(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let tagged = Regex::new(r"frame(\d+)").expect("valid regex");
    if let Some(c) = tagged.captures(stem) {
        return c[1].parse().ok();
    }
    let any = Regex::new(r"(\d+)").expect("valid regex");
    any.captures_iter(stem).last()?[1].parse().ok()
}

fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e == "hm3d"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no heatmap files found");
    }
    Ok(files)
}

fn decode(maps: &[HeatmapVolume], names: &[String], decoder: &Decoder) -> Result<Pose> {
    let joints = maps
        .iter()
        .map(|h| match decoder {
            Decoder::Soft(p) => Ok(soft_argmax_3d(h, p)?.world),
            Decoder::Hard => Ok(hard_argmax_3d(h).world),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pose::new(names.to_vec(), joints)?)
}

fn joint_names(given: &Option<Vec<String>>, count: usize) -> Result<Vec<String>> {
    match given {
        Some(names) if names.len() == count => Ok(names.clone()),
        Some(names) => bail!("{} joint names for {count} heatmaps", names.len()),
        None if count == JOINT_NAMES.len() => Ok(JOINT_NAMES.iter().map(|s| s.to_string()).collect()),
        None => Ok((0..count).map(|i| i.to_string()).collect()),
    }
}

/// Formats a temperature for a file name: `3` → `3`, `0.5` → `0.5`.
fn theta_label(theta: f64) -> String {
    format!("{theta}")
}

pub fn run(args: &SoftargmaxArgs, cfg: RunConfig) -> Result<Vec<String>> {
    let decoders: Vec<(String, Decoder)> = if args.hard {
        vec![("hard".into(), Decoder::Hard)]
    } else {
        let thetas = args.theta.clone().unwrap_or_else(|| vec![cfg.theta]);
        if thetas.is_empty() {
            bail!("--theta needs at least one value");
        }
        thetas
            .iter()
            .map(|&t| Ok((theta_label(t), Decoder::Soft(SoftArgmaxParams::new(t)?))))
            .collect::<Result<_>>()?
    };
    let files = collect_inputs(&args.inputs)?;

    let mut errors = Vec::new();
    let mut by_frame: BTreeMap<u64, PathBuf> = BTreeMap::new();
    for f in files {
        match frame_id(&f) {
            None => errors.push(format!("{}: no frame id in the file name", f.display())),
            Some(n) => {
                if let Some(prev) = by_frame.insert(n, f.clone()) {
                    errors.push(format!("frame {n}: both {} and {}", prev.display(), f.display()));
                }
            }
        }
    }

    let loaded: Vec<(u64, Result<Vec<Pose>>)> = by_frame
        .par_iter()
        .map(|(&n, path)| {
            let poses = || -> Result<Vec<Pose>> {
                let mut r = BufReader::new(File::open(path)?);
                let maps = read_heatmaps(&mut r).with_context(|| format!("{}", path.display()))?;
                let names = joint_names(&args.names, maps.len())?;
                decoders.iter().map(|(_, d)| decode(&maps, &names, d)).collect()
            };
            (n, poses())
        })
        .collect();

    let mut outputs: Vec<PoseSequence> = decoders.iter().map(|_| PoseSequence::new()).collect();
    for (n, r) in loaded {
        match r {
            Ok(poses) => {
                for (seq, p) in outputs.iter_mut().zip(poses) {
                    seq.insert(n, p);
                }
            }
            Err(e) => errors.push(format!("frame {n}: {e:#}")),
        }
    }
    if decoders.len() == 1 {
        if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
            create_dir(parent)?;
        }
        write_pose_csv(&args.out, &outputs[0])?;
    } else {
        create_dir(&args.out)?;
        for ((label, _), seq) in decoders.iter().zip(&outputs) {
            write_pose_csv(&args.out.join(format!("theta_{label}.csv")), seq)?;
        }
    }
    Ok(errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_ids_from_names() {
        assert_eq!(frame_id(Path::new("heatmaps/frame12.hm3d")), Some(12));
        assert_eq!(frame_id(Path::new("s3_frame0007.hm3d")), Some(7));
        assert_eq!(frame_id(Path::new("take2_000045.hm3d")), Some(45));
        assert_eq!(frame_id(Path::new("joints.hm3d")), None);
    }

    #[test]
    fn theta_labels() {
        assert_eq!(theta_label(3.0), "3");
        assert_eq!(theta_label(0.5), "0.5");
        assert_eq!(theta_label(100.0), "100");
    }
}
