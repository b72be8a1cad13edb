use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SyntheticScene;
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, GridSpec, Vec3};
use crate::volume::{SilhouetteImage, VoxelGrid};

/// Mean distance from the center of a unit cube to a uniform point inside it.
pub const CUBE_MEAN_DISTANCE: f64 = 0.480_295_978_227_526_5;

/// Reference carving: a plain triple loop over voxels applying the
/// nearest-pixel occupancy rule with scalar arithmetic.
pub fn brute_force_voxelize(camera: &CameraModel, silhouette: &SilhouetteImage, spec: &GridSpec) -> VoxelGrid {
    let mut k_rows = [[0.0f64; 3]; 3];
    let mut e_rows = [[0.0f64; 4]; 3];
    for r in 0..3 {
        for c in 0..3 {
            k_rows[r][c] = camera.intrinsics[(r, c)];
        }
        for c in 0..4 {
            e_rows[r][c] = camera.extrinsics[(r, c)];
        }
    }
    let mut grid = VoxelGrid::empty(*spec);
    for k in 0..spec.dims[2] {
        for j in 0..spec.dims[1] {
            for i in 0..spec.dims[0] {
                let world = [
                    spec.origin.x + (i as f64 + 0.5) * spec.voxel_size,
                    spec.origin.y + (j as f64 + 0.5) * spec.voxel_size,
                    spec.origin.z + (k as f64 + 0.5) * spec.voxel_size,
                    1.0,
                ];
                let mut cam = [0.0f64; 3];
                for r in 0..3 {
                    let mut acc = 0.0;
                    for c in 0..4 {
                        acc += e_rows[r][c] * world[c];
                    }
                    cam[r] = acc;
                }
                let mut pix = [0.0f64; 3];
                for r in 0..3 {
                    let mut acc = 0.0;
                    for c in 0..3 {
                        acc += k_rows[r][c] * cam[c];
                    }
                    pix[r] = acc;
                }
                if pix[2].abs() < 1e-9 || pix[2] <= 0.0 {
                    continue;
                }
                let u = (pix[0] / pix[2]).round();
                let v = (pix[1] / pix[2]).round();
                if u >= 0.0
                    && v >= 0.0
                    && u < silhouette.width as f64
                    && v < silhouette.height as f64
                    && silhouette.get(u as u32, v as u32)
                {
                    grid.set(i, j, k, true);
                }
            }
        }
    }
    grid
}

/// Voxels whose centers lie inside any body primitive of `scene`.
pub fn occupancy_reference(scene: &SyntheticScene, spec: &GridSpec) -> VoxelGrid {
    let mut grid = VoxelGrid::empty(*spec);
    for n in 0..spec.num_voxels() {
        let [i, j, k] = spec.index_triple(n);
        let c = spec.voxel_center(i, j, k);
        if scene.primitives.iter().any(|p| p.contains(&c)) {
            grid.set(i, j, k, true);
        }
    }
    grid
}

/// Monte-Carlo mean distance (mm) between a uniform point in the grid and
/// the center of the voxel containing it: the error floor of picking the
/// best voxel.
pub fn quantization_error_mc(spec: &GridSpec, trials: usize, seed: u64) -> Result<f64> {
    if trials < 1000 {
        return Err(Error::InvalidInput(format!("need at least 1000 trials, got {trials}")));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = spec.extent();
    let mut total = 0.0;
    for _ in 0..trials {
        let p = spec.origin
            + Vec3::new(
                rng.random::<f64>() * extent.x,
                rng.random::<f64>() * extent.y,
                rng.random::<f64>() * extent.z,
            );
        let Some([i, j, k]) = spec.containing_voxel(&p) else {
            // Only reachable through rounding at the max corner.
            continue;
        };
        total += (p - spec.voxel_center(i, j, k)).norm();
    }
    Ok(total / trials as f64)
}
