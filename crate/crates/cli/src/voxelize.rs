use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use voxfuse::io::{read_cameras, read_pose_csv, read_silhouette, write_heatmaps, write_pose_csv, write_volume, PoseSequence};
use voxfuse::synth::gaussian_heatmap;
use voxfuse::volume::{
    build_multichannel, derive_seed, estimate_subject_center, random_shut, rig_focus, rotate_scene,
    sample_rotation_angle,
};
use voxfuse::{CameraModel, GridSpec, Pose, Vec3};

use crate::config::{CenterMode, GridCenter, RunConfig};
use crate::discover::discover_silhouettes;
use crate::manifest::{AugmentSummary, FrameEntry, GridSummary, Manifest};
use crate::{create_dir, required, write_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HeatmapTarget {
    /// Peak at the center of the heatmap voxel containing the joint.
    Voxel,
    /// Peak at the joint position itself.
    Exact,
}

#[derive(Args, Debug)]
pub struct VoxelizeArgs {
    /// Scene directory supplying default input paths.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Camera calibration JSON.
    #[arg(long)]
    pub cameras: Option<PathBuf>,
    /// Silhouette file pattern [default: <scene>/silhouettes/cam{K}_frame{N}.pgm].
    #[arg(long)]
    pub silhouettes: Option<String>,
    /// Ground-truth poses; rotated with the capture when augmenting.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Voxels per axis [default: 64].
    #[arg(long)]
    pub dims: Option<usize>,
    /// Voxel edge in mm [default: 35].
    #[arg(long)]
    pub voxel_size: Option<f64>,
    /// Grid center: auto (ground-truth root if available, else hull), root,
    /// hull (coarse visual hull centroid), or fixed x,y,z in mm [default: auto].
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<GridCenter>,
    /// Enable augmentation with the configured settings.
    #[arg(long)]
    pub augment: bool,
    /// Per-channel drop probability; implies --augment [default: 0.2].
    #[arg(long)]
    pub random_shut: Option<f64>,
    /// Largest vertical-axis rotation in degrees; implies --augment [default: 0].
    #[arg(long)]
    pub rotation: Option<f64>,
    /// Augmentation seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write per-joint Gaussian heatmaps of the ground truth on the half-resolution grid.
    #[arg(long)]
    pub gt_heatmaps: bool,
    /// Gaussian width in heatmap voxels.
    #[arg(long, default_value_t = 1.5)]
    pub heatmap_sigma: f64,
    /// Where each heatmap peak is placed.
    #[arg(long, value_enum, default_value_t = HeatmapTarget::Voxel)]
    pub heatmap_target: HeatmapTarget,
    /// Soft-argmax temperature the heatmap scores are scaled for [default: 3].
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Serialize)]
struct Timing {
    frames: usize,
    total_seconds: f64,
    mean_frame_seconds: f64,
}

struct FrameOutput {
    entry: FrameEntry,
    gt: Option<Pose>,
    seconds: f64,
}

fn apply_overrides(args: &VoxelizeArgs, mut cfg: RunConfig) -> Result<RunConfig> {
    let p = &mut cfg.paths;
    if let Some(v) = &args.cameras {
        p.cameras = Some(v.clone());
    }
    if let Some(v) = &args.silhouettes {
        p.silhouettes = Some(v.clone());
    }
    if let Some(v) = &args.gt {
        p.gt = Some(v.clone());
    }
    if let Some(v) = &args.out {
        p.output = Some(v.clone());
    }
    if let Some(scene) = &args.scene {
        p.fill_from_scene(scene);
        for opt in [&mut p.imu, &mut p.topology] {
            *opt = None;
        }
        if p.gt.as_ref().is_some_and(|g| !g.is_file()) {
            p.gt = None;
        }
    }
    if let Some(v) = args.dims {
        cfg.grid.dims = v;
    }
    if let Some(v) = args.voxel_size {
        cfg.grid.voxel_size = v;
    }
    if let Some(c) = args.center {
        cfg.grid.center = c;
    }
    if args.augment {
        cfg.augment.enabled = true;
    }
    if let Some(v) = args.random_shut {
        cfg.augment.random_shut_p = v;
        cfg.augment.enabled = true;
    }
    if let Some(v) = args.rotation {
        cfg.augment.rotation_deg = v;
        cfg.augment.enabled = true;
    }
    if let Some(v) = args.seed {
        cfg.augment.seed = v;
    }
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &VoxelizeArgs, cfg: RunConfig) -> Result<Vec<String>> {
    let cfg = apply_overrides(args, cfg)?;
    if !(args.heatmap_sigma > 0.0) {
        bail!("--heatmap-sigma must be positive");
    }
    let out = required(&cfg.paths.output, "output directory")?.clone();
    let cameras = read_cameras(required(&cfg.paths.cameras, "cameras file")?)?;
    let pattern = required(&cfg.paths.silhouettes, "silhouette pattern")?;
    let index = discover_silhouettes(pattern)?;
    if index.is_empty() {
        bail!("no silhouettes match {pattern}");
    }
    let gt: Option<PoseSequence> = cfg.paths.gt.as_deref().map(read_pose_csv).transpose()?;
    if args.gt_heatmaps && gt.is_none() {
        bail!("--gt-heatmaps needs ground-truth poses");
    }
    create_dir(&out.join("volumes"))?;
    if args.gt_heatmaps {
        create_dir(&out.join("heatmaps"))?;
    }

    let started = Instant::now();
    let frames: Vec<(u64, &BTreeMap<usize, PathBuf>)> = index.iter().map(|(&n, m)| (n, m)).collect();
    let results: Vec<(u64, Result<FrameOutput>)> = frames
        .par_iter()
        .map(|&(n, files)| {
            let gt_frame = gt.as_ref().and_then(|g| g.get(&n));
            (n, process_frame(&cfg, args, &out, &cameras, n, files, gt_frame))
        })
        .collect();
    let total_seconds = started.elapsed().as_secs_f64();

    let mut errors = Vec::new();
    let mut entries = Vec::new();
    let mut rotated_gt = PoseSequence::new();
    let mut frame_seconds = 0.0;
    for (n, r) in results {
        match r {
            Ok(o) => {
                frame_seconds += o.seconds;
                if let Some(p) = o.gt {
                    rotated_gt.insert(n, p);
                }
                entries.push(o.entry);
            }
            Err(e) => errors.push(format!("frame {n}: {e:#}")),
        }
    }
    let manifest = Manifest {
        channels: cameras.len(),
        grid: GridSummary {
            dims: [cfg.grid.dims; 3],
            voxel_size: cfg.grid.voxel_size,
        },
        heatmap_grid: GridSummary {
            dims: [cfg.grid.dims / 2; 3],
            voxel_size: cfg.grid.voxel_size * 2.0,
        },
        augment: cfg.augment.enabled.then_some(AugmentSummary {
            rotation_deg: cfg.augment.rotation_deg,
            random_shut_p: cfg.augment.random_shut_p,
            seed: cfg.augment.seed,
        }),
        frames: entries,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    if !rotated_gt.is_empty() {
        write_pose_csv(&out.join("gt.csv"), &rotated_gt)?;
    }
    let done = manifest.frames.len();
    write_json(
        &out.join("timing.json"),
        &Timing {
            frames: done,
            total_seconds,
            mean_frame_seconds: if done > 0 { frame_seconds / done as f64 } else { 0.0 },
        },
    )?;
    Ok(errors)
}

fn process_frame(
    cfg: &RunConfig,
    args: &VoxelizeArgs,
    out: &std::path::Path,
    cameras: &[CameraModel],
    n: u64,
    files: &BTreeMap<usize, PathBuf>,
    gt: Option<&Pose>,
) -> Result<FrameOutput> {
    let started = Instant::now();
    if let Some(missing) = (0..cameras.len()).find(|k| !files.contains_key(k)) {
        bail!("no silhouette for camera {missing}");
    }
    if let Some(extra) = files.keys().find(|&&k| k >= cameras.len()) {
        bail!("silhouette for camera {extra} but only {} cameras", cameras.len());
    }
    let silhouettes = files
        .values()
        .map(|p| read_silhouette(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    if args.gt_heatmaps && gt.is_none() {
        bail!("no ground-truth pose for this frame");
    }

    let hull_mode = match cfg.grid.center {
        GridCenter::Fixed(_) => false,
        GridCenter::Mode(CenterMode::Hull) => true,
        GridCenter::Mode(CenterMode::Root) => {
            if gt.is_none() {
                bail!("root centering needs a ground-truth pose");
            }
            false
        }
        GridCenter::Mode(CenterMode::Auto) => gt.is_none(),
    };
    let center = match (cfg.grid.center, gt) {
        (GridCenter::Fixed(c), _) => Vec3::from(c),
        (_, Some(pose)) if !hull_mode => pose.joints[0],
        _ => {
            let coarse = GridSpec::centered_on(
                rig_focus(cameras).unwrap_or_else(Vec3::zeros),
                [cfg.grid.dims / 2; 3],
                cfg.grid.voxel_size * 4.0,
            )?;
            estimate_subject_center(cameras, &silhouettes, &coarse)?
                .context("subject not visible in any camera inside the search volume")?
        }
    };
    let spec = cfg.vision_grid(center)?;

    let frame_seed = derive_seed(cfg.augment.seed, n);
    let angle = if cfg.augment.enabled {
        sample_rotation_angle(cfg.augment.rotation_deg.to_radians(), derive_seed(frame_seed, 0))?
    } else {
        0.0
    };
    let placeholder;
    let pose = match gt {
        Some(p) => p,
        None => {
            placeholder = Pose::unnamed(vec![center])?;
            &placeholder
        }
    };
    let rotated = rotate_scene(angle, &center, cameras, pose, &[])?;
    let volume = build_multichannel(&rotated.cameras, &silhouettes, &spec)?;
    let empty_channels: Vec<usize> = (0..volume.channels()).filter(|&k| volume.channel_is_empty(k)).collect();
    let (volume, dropped_channels) = if cfg.augment.enabled {
        random_shut(&volume, cfg.augment.random_shut_p, derive_seed(frame_seed, 1))?
    } else {
        (volume, Vec::new())
    };

    let volume_name = format!("volumes/frame{n}.mcv1");
    let mut w = BufWriter::new(File::create(out.join(&volume_name))?);
    write_volume(&mut w, &volume)?;
    std::io::Write::flush(&mut w)?;

    let heatmaps = if args.gt_heatmaps {
        let heat_spec = cfg.heatmap_grid(&spec)?;
        let maps = rotated
            .gt
            .joints
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let target = match args.heatmap_target {
                    HeatmapTarget::Exact => *p,
                    HeatmapTarget::Voxel => {
                        let [a, b, c] = heat_spec
                            .containing_voxel(p)
                            .with_context(|| format!("joint {j} lies outside the heatmap grid"))?;
                        heat_spec.voxel_center(a, b, c)
                    }
                };
                Ok(gaussian_heatmap(&heat_spec, &target, args.heatmap_sigma, cfg.theta)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let name = format!("heatmaps/frame{n}.hm3d");
        let mut w = BufWriter::new(File::create(out.join(&name))?);
        write_heatmaps(&mut w, &maps)?;
        std::io::Write::flush(&mut w)?;
        Some(name)
    } else {
        None
    };

    Ok(FrameOutput {
        entry: FrameEntry {
            frame: n,
            volume: volume_name,
            origin: spec.origin.into(),
            center: center.into(),
            full_frame: empty_channels.is_empty(),
            empty_channels,
            dropped_channels,
            rotation_rad: angle,
            heatmaps,
        },
        gt: gt.map(|_| rotated.gt),
        seconds: started.elapsed().as_secs_f64(),
    })
}
