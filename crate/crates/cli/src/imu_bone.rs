use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use voxfuse::fusion::imu_bone_stack;
use voxfuse::io::{read_imu_csv, read_pose_csv, read_topology, write_volume};
use voxfuse::{GridSpec, Vec3};

use crate::config::RunConfig;
use crate::manifest::{GridSummary, Manifest};
use crate::{create_dir, required, write_json};

#[derive(Args, Debug)]
pub struct ImuBoneArgs {
    /// Scene directory supplying default input paths (poses default to its gt.csv).
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Pose estimates, CSV.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// IMU orientation CSV.
    #[arg(long)]
    pub imu: Option<PathBuf>,
    /// Skeleton topology JSON.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// `voxelize` manifest whose per-frame grids to use [default: grid centered on the root joint].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Cylinder radius in mm [default: 70].
    #[arg(long)]
    pub radius: Option<f64>,
    /// Vision grid voxels per axis; IMU-bone volumes use half [default: 64].
    #[arg(long)]
    pub dims: Option<usize>,
    /// Vision voxel edge in mm; IMU-bone volumes use double [default: 35].
    #[arg(long)]
    pub voxel_size: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct BoneFrame {
    frame: u64,
    volume: String,
    origin: [f64; 3],
}

#[derive(Serialize)]
struct BoneManifest {
    channels: usize,
    grid: GridSummary,
    cylinder_radius: f64,
    frames: Vec<BoneFrame>,
}

fn apply_overrides(args: &ImuBoneArgs, mut cfg: RunConfig) -> Result<RunConfig> {
    let p = &mut cfg.paths;
    if let Some(v) = &args.poses {
        p.poses = Some(v.clone());
    }
    if let Some(v) = &args.imu {
        p.imu = Some(v.clone());
    }
    if let Some(v) = &args.topology {
        p.topology = Some(v.clone());
    }
    if let Some(v) = &args.out {
        p.output = Some(v.clone());
    }
    if let Some(scene) = &args.scene {
        p.imu.get_or_insert_with(|| scene.join("imu.csv"));
        p.topology.get_or_insert_with(|| scene.join("topology.json"));
        p.poses.get_or_insert_with(|| scene.join("gt.csv"));
    }
    if let Some(v) = args.radius {
        cfg.cylinder_radius = v;
    }
    if let Some(v) = args.dims {
        cfg.grid.dims = v;
    }
    if let Some(v) = args.voxel_size {
        cfg.grid.voxel_size = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &ImuBoneArgs, cfg: RunConfig) -> Result<Vec<String>> {
    let cfg = apply_overrides(args, cfg)?;
    let out = required(&cfg.paths.output, "output directory")?.clone();
    let poses = read_pose_csv(required(&cfg.paths.poses, "pose estimates")?)?;
    let imu = read_imu_csv(required(&cfg.paths.imu, "IMU file")?)?;
    let topology = read_topology(required(&cfg.paths.topology, "topology file")?)?;
    let manifest = args.manifest.as_deref().map(Manifest::load).transpose()?;

    if let Some(f) = poses
        .keys()
        .filter(|f| !imu.frames.contains_key(f))
        .chain(imu.frames.keys().filter(|f| !poses.contains_key(f)))
        .min()
    {
        let side = if poses.contains_key(f) { "pose file but not the IMU file" } else { "IMU file but not the pose file" };
        bail!("frame alignment mismatch: frame {f} is in the {side}");
    }
    let by_frame = manifest.as_ref().map(|m| m.by_frame());

    create_dir(&out.join("volumes"))?;
    let items: Vec<u64> = poses.keys().copied().collect();
    let results: Vec<(u64, Result<BoneFrame>)> = items
        .par_iter()
        .map(|&n| {
            let frame = || -> Result<BoneFrame> {
                let pose = &poses[&n];
                topology.validate_for(pose.len())?;
                let spec = match (&manifest, &by_frame) {
                    (Some(m), Some(idx)) => {
                        let Some(entry) = idx.get(&n) else {
                            bail!("not listed in the manifest");
                        };
                        m.heatmap_grid(entry)?
                    }
                    _ => {
                        let vision = cfg.vision_grid(pose.joints[0])?;
                        cfg.heatmap_grid(&vision)?
                    }
                };
                let stack = imu_bone_stack(pose, &imu.frames[&n], &topology, cfg.cylinder_radius, &spec)?;
                let name = format!("volumes/frame{n}.mcv1");
                let mut w = BufWriter::new(File::create(out.join(&name))?);
                write_volume(&mut w, &stack)?;
                w.flush()?;
                Ok(BoneFrame {
                    frame: n,
                    volume: name,
                    origin: spec.origin.into(),
                })
            };
            (n, frame())
        })
        .collect();

    let mut errors = Vec::new();
    let mut frames = Vec::new();
    for (n, r) in results {
        match r {
            Ok(f) => frames.push(f),
            Err(e) => errors.push(format!("frame {n}: {e:#}")),
        }
    }
    let grid = match &manifest {
        Some(m) => m.heatmap_grid.clone(),
        None => {
            let g: GridSpec = cfg.heatmap_grid(&cfg.vision_grid(Vec3::zeros())?)?;
            GridSummary {
                dims: g.dims,
                voxel_size: g.voxel_size,
            }
        }
    };
    write_json(
        &out.join("manifest.json"),
        &BoneManifest {
            channels: topology.len(),
            grid,
            cylinder_radius: cfg.cylinder_radius,
            frames,
        },
    )?;
    Ok(errors)
}
