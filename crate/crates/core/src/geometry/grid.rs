use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{Error, Result};

/// World anchoring of a regular voxel grid.
///
/// Voxel `(i, j, k)` has its center at `origin + (index + 0.5) * voxel_size`;
/// linear indices run x-fastest: `i + nx * (j + ny * k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Minimum corner, world mm.
    pub origin: Vec3,
    pub dims: [usize; 3],
    /// Edge length of a cubic voxel, mm.
    pub voxel_size: f64,
}

impl GridSpec {
    pub fn new(origin: Vec3, dims: [usize; 3], voxel_size: f64) -> Result<Self> {
        let spec = Self {
            origin,
            dims,
            voxel_size,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Grid whose world-space center is `center`.
    pub fn centered_on(center: Vec3, dims: [usize; 3], voxel_size: f64) -> Result<Self> {
        let half_extent = Vec3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * (0.5 * voxel_size);
        Self::new(center - half_extent, dims, voxel_size)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.voxel_size > 0.0 && self.voxel_size.is_finite()) {
            return Err(Error::Config(format!(
                "voxel size must be positive, got {}",
                self.voxel_size
            )));
        }
        if self.dims.contains(&0) {
            return Err(Error::Config(format!("grid dims must be positive, got {:?}", self.dims)));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn num_voxels(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn extent(&self) -> Vec3 {
        Vec3::new(
            self.dims[0] as f64 * self.voxel_size,
            self.dims[1] as f64 * self.voxel_size,
            self.dims[2] as f64 * self.voxel_size,
        )
    }

    pub fn center(&self) -> Vec3 {
        self.origin + self.extent() * 0.5
    }

    pub fn max_corner(&self) -> Vec3 {
        self.origin + self.extent()
    }

    #[inline]
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn index_triple(&self, linear: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [linear % nx, (linear / nx) % ny, linear / (nx * ny)]
    }

    /// Continuous world position of fractional voxel indices (index space
    /// addresses voxel centers at integers).
    #[inline]
    pub fn index_to_world(&self, index: &Vec3) -> Vec3 {
        self.origin + (index + Vec3::repeat(0.5)) * self.voxel_size
    }

    /// World position of the integer voxel center.
    #[inline]
    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.index_to_world(&Vec3::new(i as f64, j as f64, k as f64))
    }

    /// Fractional index of a world point (inverse of [`GridSpec::index_to_world`]).
    pub fn world_to_index(&self, point: &Vec3) -> Vec3 {
        (point - self.origin) / self.voxel_size - Vec3::repeat(0.5)
    }

    /// Voxel containing `point`, or `None` outside the grid.
    pub fn containing_voxel(&self, point: &Vec3) -> Option<[usize; 3]> {
        let rel = (point - self.origin) / self.voxel_size;
        let mut out = [0usize; 3];
        for axis in 0..3 {
            let f = rel[axis].floor();
            if !(f >= 0.0 && f < self.dims[axis] as f64) {
                return None;
            }
            out[axis] = f as usize;
        }
        Some(out)
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.dims == other.dims
    }
}
