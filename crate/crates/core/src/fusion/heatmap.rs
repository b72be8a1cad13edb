use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Vec3};

/// Softmax temperature used when none is configured.
pub const DEFAULT_THETA: f64 = 3.0;

/// Unnormalized per-voxel scores for one joint, x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapVolume {
    pub spec: GridSpec,
    values: Vec<f64>,
}

impl HeatmapVolume {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.num_voxels() {
            return Err(Error::InvalidInput(format!(
                "heatmap has {} values, grid holds {}",
                values.len(),
                spec.num_voxels()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let values = (0..spec.num_voxels())
            .map(|n| {
                let [i, j, k] = spec.index_triple(n);
                f(i, j, k)
            })
            .collect();
        Self::new(spec, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftArgmaxParams {
    pub theta: f64,
}

impl SoftArgmaxParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidInput(format!("theta must be positive, got {theta}")));
        }
        Ok(Self { theta })
    }
}

impl Default for SoftArgmaxParams {
    fn default() -> Self {
        Self { theta: DEFAULT_THETA }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftArgmax {
    /// Expected voxel index per axis (fractional).
    pub index: Vec3,
    pub world: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardArgmax {
    pub index: [usize; 3],
    pub world: Vec3,
}

/// Derivatives of the three soft-argmax index coordinates with respect to
/// every heatmap value: `rows[axis][voxel]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    pub rows: [Vec<f64>; 3],
}

/// Stabilized softmax weights `exp(theta * x - max)`; returns them unnormalized
/// together with their sum.
fn tempered_weights(heatmap: &HeatmapVolume, theta: f64) -> Result<(Vec<f64>, f64)> {
    let values = heatmap.values();
    if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::InvalidInput("heatmap contains NaN or +inf".into()));
    }
    let shift = values
        .iter()
        .map(|v| theta * v)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::InvalidInput("heatmap has no finite values".into()));
    }
    let weights: Vec<f64> = values.iter().map(|v| (theta * v - shift).exp()).collect();
    let total = weights.iter().sum();
    Ok((weights, total))
}

/// Softmax-weighted mean voxel index (and its world position) at temperature
/// `params.theta`.
pub fn soft_argmax_3d(heatmap: &HeatmapVolume, params: &SoftArgmaxParams) -> Result<SoftArgmax> {
    let (weights, total) = tempered_weights(heatmap, params.theta)?;
    let spec = &heatmap.spec;
    let mut acc = Vec3::zeros();
    for (n, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let [i, j, k] = spec.index_triple(n);
        acc += Vec3::new(i as f64, j as f64, k as f64) * *w;
    }
    let index = acc / total;
    Ok(SoftArgmax {
        index,
        world: spec.index_to_world(&index),
    })
}

/// Analytic Jacobian of [`soft_argmax_3d`]'s index coordinates:
/// `d index[a] / d x_j = theta * p_j * (idx_a(j) - index[a])`.
pub fn soft_argmax_gradient(heatmap: &HeatmapVolume, params: &SoftArgmaxParams) -> Result<Jacobian> {
    let (weights, total) = tempered_weights(heatmap, params.theta)?;
    let spec = &heatmap.spec;
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut mean = [0.0f64; 3];
    for (n, p) in probs.iter().enumerate() {
        let idx = spec.index_triple(n);
        for a in 0..3 {
            mean[a] += p * idx[a] as f64;
        }
    }
    let mut rows = [
        vec![0.0; probs.len()],
        vec![0.0; probs.len()],
        vec![0.0; probs.len()],
    ];
    for (n, p) in probs.iter().enumerate() {
        let idx = spec.index_triple(n);
        for a in 0..3 {
            rows[a][n] = params.theta * p * (idx[a] as f64 - mean[a]);
        }
    }
    Ok(Jacobian { rows })
}

/// Index of the largest value; ties go to the smallest linear index.
pub fn hard_argmax_3d(heatmap: &HeatmapVolume) -> HardArgmax {
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for (n, &v) in heatmap.values().iter().enumerate() {
        if v > best_value {
            best = n;
            best_value = v;
        }
    }
    let index = heatmap.spec.index_triple(best);
    HardArgmax {
        index,
        world: heatmap.spec.voxel_center(index[0], index[1], index[2]),
    }
}
