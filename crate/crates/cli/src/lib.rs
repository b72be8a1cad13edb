//! Command-line pipeline: synthetic scenes, voxelization, IMU-bone volumes,
//! soft-argmax decoding and evaluation.
//!
//! Every command reports per-item problems (a frame, a file) as strings and
//! keeps going; the binary prints them to stderr and exits non-zero if there
//! were any.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

pub mod config;
pub mod discover;
mod eval;
mod imu_bone;
pub mod manifest;
mod softargmax;
mod synth;
mod voxelize;

pub use config::RunConfig;

/// Environment variable capping worker threads; `0` or unset means one per core.
pub const THREADS_ENV: &str = "VOXFUSE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "voxfuse", version, about = "Multi-view silhouette + IMU volumetric pose pipeline")]
pub struct Cli {
    /// Run configuration file, TOML or JSON (by extension). Flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a synthetic capture: cameras, silhouettes, ground truth, IMU readings, topology.
    Synth(synth::SynthArgs),
    /// Carve per-camera occupancy volumes from silhouettes.
    Voxelize(voxelize::VoxelizeArgs),
    /// Build IMU-bone cylinder volumes from pose estimates and IMU orientations.
    #[command(name = "imu-bone")]
    ImuBone(imu_bone::ImuBoneArgs),
    /// Decode joint positions from per-joint heatmap files.
    Softargmax(softargmax::SoftargmaxArgs),
    /// Compare predicted and ground-truth poses.
    Eval(eval::EvalArgs),
}

/// Runs one command and returns its per-item errors.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Synth(args) => synth::run(args),
        Command::Voxelize(args) => voxelize::run(args, config),
        Command::ImuBone(args) => imu_bone::run(args, config),
        Command::Softargmax(args) => softargmax::run(args, config),
        Command::Eval(args) => eval::run(args, config),
    }
}

/// Sizes the global thread pool from [`THREADS_ENV`].
pub fn configure_threads() -> Result<()> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub(crate) fn required<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T> {
    value
        .as_ref()
        .with_context(|| format!("no {what} given (use the flag, --scene, or the config file)"))
}
