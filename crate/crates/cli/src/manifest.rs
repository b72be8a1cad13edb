//! `voxelize` output manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use voxfuse::{GridSpec, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub dims: [usize; 3],
    pub voxel_size: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub rotation_deg: f64,
    pub random_shut_p: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub frame: u64,
    /// Volume file, relative to the manifest.
    pub volume: String,
    /// World position of the vision grid's minimum corner.
    pub origin: [f64; 3],
    pub center: [f64; 3],
    /// Subject seen by every camera.
    pub full_frame: bool,
    pub empty_channels: Vec<usize>,
    pub dropped_channels: Vec<usize>,
    pub rotation_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmaps: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub channels: usize,
    pub grid: GridSummary,
    pub heatmap_grid: GridSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augment: Option<AugmentSummary>,
    /// Sorted by frame id.
    pub frames: Vec<FrameEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    /// Vision grid of one frame.
    pub fn vision_grid(&self, entry: &FrameEntry) -> Result<GridSpec> {
        Ok(GridSpec::new(Vec3::from(entry.origin), self.grid.dims, self.grid.voxel_size)?)
    }

    pub fn heatmap_grid(&self, entry: &FrameEntry) -> Result<GridSpec> {
        Ok(GridSpec::new(
            Vec3::from(entry.origin),
            self.heatmap_grid.dims,
            self.heatmap_grid.voxel_size,
        )?)
    }

    pub fn by_frame(&self) -> BTreeMap<u64, &FrameEntry> {
        self.frames.iter().map(|f| (f.frame, f)).collect()
    }
}
