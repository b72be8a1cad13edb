use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use voxfuse::io::{write_cameras, write_imu_csv, write_pgm, write_pose_csv, write_topology, PoseSequence};
use voxfuse::synth::{generate_scene_with, render_silhouette, ImuCalibration, SceneParams, SyntheticScene};
use voxfuse::volume::derive_seed;
use voxfuse::SilhouetteImage;

use crate::create_dir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ImuFrameArg {
    /// Raw sensor readings plus per-sensor calibration constants.
    Local,
    /// Calibrated bone orientations.
    Global,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output scene directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Base seed; frame n uses a seed derived from (seed, n).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of frames.
    #[arg(long, default_value_t = 4)]
    pub frames: u64,
    /// Cameras on a 4.5 m ring, alternating between 0.9 m and 2.1 m height.
    #[arg(long, default_value_t = 8)]
    pub cameras: usize,
    /// Largest horizontal offset of the subject root from the ring axis, mm.
    #[arg(long, default_value_t = 300.0)]
    pub pose_spread: f64,
    /// Coordinate frame of the written IMU orientations.
    #[arg(long, value_enum, default_value_t = ImuFrameArg::Local)]
    pub imu_frame: ImuFrameArg,
    /// Per-axis uniform angular jitter on IMU orientations, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub imu_jitter_deg: f64,
    /// Number of trailing frames in which one camera sees nothing.
    #[arg(long, default_value_t = 0)]
    pub partial_frames: u64,
}

/// Seed offset for choices that are not part of a frame's scene.
const SIDE_STREAM: u64 = 0x005e_ed0f_51de;

pub fn run(args: &SynthArgs) -> Result<Vec<String>> {
    if args.frames == 0 {
        bail!("--frames must be positive");
    }
    if args.partial_frames > args.frames {
        bail!("--partial-frames exceeds --frames");
    }
    if !(args.imu_jitter_deg >= 0.0) {
        bail!("--imu-jitter-deg must be non-negative");
    }
    let params = SceneParams {
        imu_jitter: args.imu_jitter_deg.to_radians(),
        ..SceneParams::default()
    };
    create_dir(&args.out)?;
    let sil_dir = args.out.join("silhouettes");
    create_dir(&sil_dir)?;

    let results: Vec<(u64, Result<SyntheticScene>)> = (0..args.frames)
        .into_par_iter()
        .map(|n| {
            let frame = || -> Result<SyntheticScene> {
                let scene = generate_scene_with(derive_seed(args.seed, n), args.cameras, args.pose_spread, &params)?;
                let blanked = (n >= args.frames - args.partial_frames)
                    .then(|| (derive_seed(args.seed ^ SIDE_STREAM, n) % args.cameras as u64) as usize);
                for k in 0..scene.cameras.len() {
                    let sil = if blanked == Some(k) {
                        let c = &scene.cameras[k];
                        SilhouetteImage::filled(c.width, c.height, false)
                    } else {
                        render_silhouette(&scene, k)?
                    };
                    write_pgm(&sil_dir.join(format!("cam{k}_frame{n}.pgm")), &sil)?;
                }
                Ok(scene)
            };
            (n, frame())
        })
        .collect();

    let mut errors = Vec::new();
    let mut gt = PoseSequence::new();
    let mut imu = BTreeMap::new();
    let mut first: Option<SyntheticScene> = None;
    for (n, r) in results {
        match r {
            Ok(scene) => {
                gt.insert(n, scene.skeleton.clone());
                imu.insert(n, scene.imu_orientations.clone());
                first.get_or_insert(scene);
            }
            Err(e) => errors.push(format!("frame {n}: {e:#}")),
        }
    }
    let Some(first) = first else {
        return Ok(errors);
    };
    write_cameras(&args.out.join("cameras.json"), &first.cameras)?;
    write_topology(&args.out.join("topology.json"), &first.topology)?;
    write_pose_csv(&args.out.join("gt.csv"), &gt)?;
    let calibration = match args.imu_frame {
        ImuFrameArg::Local => Some(ImuCalibration::random(
            derive_seed(args.seed ^ SIDE_STREAM, u64::MAX),
            first.topology.len(),
        )),
        ImuFrameArg::Global => None,
    };
    write_imu_csv(&args.out.join("imu.csv"), &imu, calibration.as_ref())?;
    Ok(errors)
}
