use crate::error::{Error, Result};
use crate::geometry::GridSpec;

/// Single-channel binary occupancy grid (x-fastest, values 0 or 1).
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    pub spec: GridSpec,
    data: Vec<u8>,
}

impl VoxelGrid {
    pub fn empty(spec: GridSpec) -> Self {
        Self {
            data: vec![0; spec.num_voxels()],
            spec,
        }
    }

    pub fn from_data(spec: GridSpec, data: Vec<u8>) -> Result<Self> {
        if data.len() != spec.num_voxels() {
            return Err(Error::InvalidInput(format!(
                "voxel payload has {} entries, grid holds {}",
                data.len(),
                spec.num_voxels()
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput("voxel grid values must be 0 or 1".into()));
        }
        Ok(Self { spec, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.spec.linear_index(i, j, k)] != 0
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, occupied: bool) {
        let n = self.spec.linear_index(i, j, k);
        self.data[n] = u8::from(occupied);
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn occupied_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }
}

/// `K` occupancy channels sharing one grid, channel-major then x-fastest.
///
/// Volumes built from silhouettes are binary; pooled volumes may hold
/// fractional occupancy in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelVolume {
    pub spec: GridSpec,
    channels: usize,
    data: Vec<f32>,
}

impl MultiChannelVolume {
    pub fn zeros(spec: GridSpec, channels: usize) -> Self {
        Self {
            data: vec![0.0; channels * spec.num_voxels()],
            spec,
            channels,
        }
    }

    pub fn from_data(spec: GridSpec, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidInput("volume needs at least one channel".into()));
        }
        if data.len() != channels * spec.num_voxels() {
            return Err(Error::InvalidInput(format!(
                "volume payload has {} values, expected {} x {}",
                data.len(),
                channels,
                spec.num_voxels()
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput("occupancy values must lie in [0, 1]".into()));
        }
        Ok(Self {
            spec,
            channels,
            data,
        })
    }

    /// Stacks binary grids as channels in order.
    pub fn from_grids(grids: &[VoxelGrid]) -> Result<Self> {
        let first = grids
            .first()
            .ok_or_else(|| Error::InvalidInput("no channels to stack".into()))?;
        if let Some(bad) = grids.iter().find(|g| g.spec != first.spec) {
            return Err(Error::Config(format!(
                "channel grid {:?} differs from {:?}",
                bad.spec.dims, first.spec.dims
            )));
        }
        let data = grids
            .iter()
            .flat_map(|g| g.data.iter().map(|&v| f32::from(v)))
            .collect();
        Ok(Self {
            spec: first.spec,
            channels: grids.len(),
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `[channels, nx, ny, nz]`.
    pub fn shape(&self) -> [usize; 4] {
        let [nx, ny, nz] = self.spec.dims;
        [self.channels, nx, ny, nz]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn channel(&self, k: usize) -> &[f32] {
        let n = self.spec.num_voxels();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn channel_mut(&mut self, k: usize) -> &mut [f32] {
        let n = self.spec.num_voxels();
        &mut self.data[k * n..(k + 1) * n]
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize, l: usize) -> f32 {
        self.data[k * self.spec.num_voxels() + self.spec.linear_index(i, j, l)]
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Channel `k` as a binary grid (voxels at or above 0.5 are occupied).
    pub fn channel_grid(&self, k: usize) -> VoxelGrid {
        VoxelGrid {
            spec: self.spec,
            data: self.channel(k).iter().map(|&v| u8::from(v >= 0.5)).collect(),
        }
    }

    pub fn channel_is_empty(&self, k: usize) -> bool {
        self.channel(k).iter().all(|&v| v == 0.0)
    }

    /// 2× average pooling on every axis; the grid keeps its world extent.
    pub fn average_pool_2x(&self) -> Result<Self> {
        let [nx, ny, nz] = self.spec.dims;
        if nx % 2 != 0 || ny % 2 != 0 || nz % 2 != 0 {
            return Err(Error::Config(format!(
                "cannot pool odd grid dims {:?}",
                self.spec.dims
            )));
        }
        let spec = GridSpec::new(self.spec.origin, [nx / 2, ny / 2, nz / 2], self.spec.voxel_size * 2.0)?;
        let mut out = Self::zeros(spec, self.channels);
        for c in 0..self.channels {
            let src = self.channel(c);
            let dst = out.channel_mut(c);
            for k in 0..nz / 2 {
                for j in 0..ny / 2 {
                    for i in 0..nx / 2 {
                        let mut sum = 0.0f32;
                        for (di, dj, dk) in OCTANT {
                            sum += src[self.spec.linear_index(2 * i + di, 2 * j + dj, 2 * k + dk)];
                        }
                        dst[spec.linear_index(i, j, k)] = sum / 8.0;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Channel-wise concatenation; all parts must share grid dims.
    pub fn concat(parts: &[&MultiChannelVolume]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("nothing to concatenate".into()))?;
        if let Some(bad) = parts.iter().find(|p| !p.spec.same_shape(&first.spec)) {
            return Err(Error::Config(format!(
                "cannot concatenate grid dims {:?} with {:?}",
                bad.spec.dims, first.spec.dims
            )));
        }
        let channels = parts.iter().map(|p| p.channels).sum();
        let mut data = Vec::with_capacity(channels * first.spec.num_voxels());
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Ok(Self {
            spec: first.spec,
            channels,
            data,
        })
    }
}

const OCTANT: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (1, 1, 0),
    (0, 0, 1),
    (1, 0, 1),
    (0, 1, 1),
    (1, 1, 1),
];
