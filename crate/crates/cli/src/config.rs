//! Run configuration: a TOML or JSON file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use voxfuse::GridSpec;

pub const DEFAULT_SILHOUETTE_PATTERN: &str = "silhouettes/cam{K}_frame{N}.pgm";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub cameras: Option<PathBuf>,
    /// File pattern with `{K}` (camera) and `{N}` (frame) placeholders; `*`
    /// matches anything within a file name.
    pub silhouettes: Option<String>,
    pub imu: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    /// Pose estimates consumed by `imu-bone`.
    pub poses: Option<PathBuf>,
    pub topology: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// How each frame's vision grid is anchored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterMode {
    /// Ground-truth root joint when a pose is available, else `hull`.
    Auto,
    /// First joint of the ground-truth pose.
    Root,
    /// Centroid of the visual hull from a coarse pre-pass.
    Hull,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridCenter {
    Fixed([f64; 3]),
    Mode(CenterMode),
}

impl FromStr for GridCenter {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Self::Mode(CenterMode::Auto)),
            "root" => Ok(Self::Mode(CenterMode::Root)),
            "hull" => Ok(Self::Mode(CenterMode::Hull)),
            other => {
                let v: Vec<f64> = other
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .with_context(|| format!("grid center {other:?} is not auto, root, hull or x,y,z"))?;
                match v.as_slice() {
                    &[x, y, z] => Ok(Self::Fixed([x, y, z])),
                    _ => bail!("grid center {other:?} needs three coordinates"),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Voxels per axis of the vision volume.
    pub dims: usize,
    /// Vision voxel edge, mm.
    pub voxel_size: f64,
    /// `"auto"`, `"root"`, `"hull"`, or a fixed `[x, y, z]` in mm.
    pub center: GridCenter,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dims: 64,
            voxel_size: 35.0,
            center: GridCenter::Mode(CenterMode::Auto),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub enabled: bool,
    /// Largest vertical-axis rotation, degrees.
    pub rotation_deg: f64,
    pub random_shut_p: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            rotation_deg: 0.0,
            random_shut_p: 0.2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: PathConfig,
    pub grid: GridConfig,
    pub augment: AugmentConfig,
    pub theta: f64,
    /// IMU-bone cylinder radius, mm.
    pub cylinder_radius: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: PathConfig::default(),
            grid: GridConfig::default(),
            augment: AugmentConfig::default(),
            theta: voxfuse::fusion::DEFAULT_THETA,
            cylinder_radius: voxfuse::fusion::DEFAULT_CYLINDER_RADIUS,
        }
    }
}

impl RunConfig {
    /// Parses `path` as JSON when it ends in `.json`, TOML otherwise.
    /// Relative paths inside are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.resolve_against(base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            bail!("theta must be positive, got {}", self.theta);
        }
        if !(0.0..=1.0).contains(&self.augment.random_shut_p) {
            bail!("random_shut_p must be in [0, 1], got {}", self.augment.random_shut_p);
        }
        if !(0.0..=180.0).contains(&self.augment.rotation_deg) {
            bail!("rotation_deg must be in [0, 180], got {}", self.augment.rotation_deg);
        }
        if self.grid.dims == 0 || !self.grid.dims.is_multiple_of(2) {
            bail!("grid dims must be a positive even number, got {}", self.grid.dims);
        }
        if !(self.grid.voxel_size > 0.0 && self.grid.voxel_size.is_finite()) {
            bail!("voxel_size must be positive, got {}", self.grid.voxel_size);
        }
        if !(self.cylinder_radius > 0.0 && self.cylinder_radius.is_finite()) {
            bail!("cylinder_radius must be positive, got {}", self.cylinder_radius);
        }
        let p = &self.paths;
        for (what, path) in [
            ("cameras", &p.cameras),
            ("imu", &p.imu),
            ("gt", &p.gt),
            ("poses", &p.poses),
            ("topology", &p.topology),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    bail!("{what} file {} does not exist", path.display());
                }
            }
        }
        Ok(())
    }

    /// Vision grid of the configured resolution centered on `center`.
    pub fn vision_grid(&self, center: voxfuse::Vec3) -> Result<GridSpec> {
        Ok(GridSpec::centered_on(center, [self.grid.dims; 3], self.grid.voxel_size)?)
    }

    /// Half-resolution grid sharing the vision grid's corner, used for
    /// heatmaps and IMU-bone volumes.
    pub fn heatmap_grid(&self, vision: &GridSpec) -> Result<GridSpec> {
        Ok(GridSpec::new(
            vision.origin,
            vision.dims.map(|d| d / 2),
            vision.voxel_size * 2.0,
        )?)
    }
}

impl PathConfig {
    fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.cameras);
        fix(&mut self.imu);
        fix(&mut self.gt);
        fix(&mut self.poses);
        fix(&mut self.topology);
        fix(&mut self.output);
        if let Some(s) = &mut self.silhouettes {
            if Path::new(s.as_str()).is_relative() {
                *s = base.join(s.as_str()).to_string_lossy().into_owned();
            }
        }
    }

    /// Fills unset paths with the standard layout of a scene directory.
    pub fn fill_from_scene(&mut self, scene: &Path) {
        self.cameras.get_or_insert_with(|| scene.join("cameras.json"));
        self.silhouettes
            .get_or_insert_with(|| scene.join(DEFAULT_SILHOUETTE_PATTERN).to_string_lossy().into_owned());
        self.imu.get_or_insert_with(|| scene.join("imu.csv"));
        self.gt.get_or_insert_with(|| scene.join("gt.csv"));
        self.topology.get_or_insert_with(|| scene.join("topology.json"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.grid.dims, 64);
        assert_eq!(cfg.grid.voxel_size, 35.0);
        assert_eq!(cfg.theta, 3.0);
        assert_eq!(cfg.augment.random_shut_p, 0.2);
        assert_eq!(cfg.cylinder_radius, 70.0);
        cfg.validate().unwrap();
        let vision = cfg.vision_grid(voxfuse::Vec3::zeros()).unwrap();
        let heat = cfg.heatmap_grid(&vision).unwrap();
        assert_eq!(heat.dims, [32; 3]);
        assert_eq!(heat.voxel_size, 70.0);
    }

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("run.toml");
        fs::write(
            &toml_path,
            "theta = 5.0\n[grid]\ndims = 32\n[augment]\nenabled = true\nseed = 7\n[paths]\ngt = \"gt.csv\"\n",
        )
        .unwrap();
        let json_path = dir.path().join("run.json");
        fs::write(
            &json_path,
            r#"{"theta": 5.0, "grid": {"dims": 32}, "augment": {"enabled": true, "seed": 7}, "paths": {"gt": "gt.csv"}}"#,
        )
        .unwrap();
        let a = RunConfig::load(&toml_path).unwrap();
        let b = RunConfig::load(&json_path).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid.voxel_size, 35.0);
        assert_eq!(a.paths.gt.as_deref(), Some(dir.path().join("gt.csv").as_path()));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.theta = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.augment.random_shut_p = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.grid.dims = 33;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.paths.gt = Some(PathBuf::from("/definitely/missing.csv"));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn center_settings_parse() {
        assert_eq!("hull".parse::<GridCenter>().unwrap(), GridCenter::Mode(CenterMode::Hull));
        assert_eq!("1,2.5,-3".parse::<GridCenter>().unwrap(), GridCenter::Fixed([1.0, 2.5, -3.0]));
        assert!("1,2".parse::<GridCenter>().is_err());
        assert!("middle".parse::<GridCenter>().is_err());
        let g: GridConfig = toml::from_str("center = [0.0, 0.0, 900.0]").unwrap();
        assert_eq!(g.center, GridCenter::Fixed([0.0, 0.0, 900.0]));
        let g: GridConfig = toml::from_str("center = \"root\"").unwrap();
        assert_eq!(g.center, GridCenter::Mode(CenterMode::Root));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "thetta = 5.0\n").unwrap();
        assert!(RunConfig::load(&path).is_err());
    }
}
