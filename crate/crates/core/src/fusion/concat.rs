use std::ops::Range;

use super::HeatmapVolume;
use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::volume::MultiChannelVolume;

/// Input tensor of the refinement stage: vision occupancy, per-joint
/// heatmaps and IMU-bone channels stacked in that order.
///
/// Heatmap channels carry raw scores, so values are not confined to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementInput {
    pub spec: GridSpec,
    pub channels: usize,
    /// Channel-major, x-fastest.
    pub data: Vec<f64>,
    pub vision: Range<usize>,
    pub heatmaps: Range<usize>,
    pub imu_bones: Range<usize>,
}

impl RefinementInput {
    pub fn shape(&self) -> [usize; 4] {
        let [nx, ny, nz] = self.spec.dims;
        [self.channels, nx, ny, nz]
    }

    pub fn channel(&self, k: usize) -> &[f64] {
        let n = self.spec.num_voxels();
        &self.data[k * n..(k + 1) * n]
    }
}

fn aligned(a: &GridSpec, b: &GridSpec) -> bool {
    a.dims == b.dims
        && (a.voxel_size - b.voxel_size).abs() <= 1e-6 * a.voxel_size
        && (a.origin - b.origin).abs().max() <= 1e-6 * a.voxel_size
}

/// Concatenates `[vision, heatmaps, imu_bones]` channel-wise. All inputs must
/// live on the same grid; pool the 64³ vision volume to 32³ beforehand.
pub fn concat_refinement_input(
    vision: &MultiChannelVolume,
    heatmaps: &[HeatmapVolume],
    imu_bones: &MultiChannelVolume,
) -> Result<RefinementInput> {
    let spec = vision.spec;
    let mismatch = |what: &str, other: &GridSpec| {
        Error::Config(format!(
            "{what} grid {:?} @ {} mm does not match vision grid {:?} @ {} mm",
            other.dims, other.voxel_size, spec.dims, spec.voxel_size
        ))
    };
    if !aligned(&spec, &imu_bones.spec) {
        return Err(mismatch("IMU-bone", &imu_bones.spec));
    }
    if let Some(h) = heatmaps.iter().find(|h| !aligned(&spec, &h.spec)) {
        return Err(mismatch("heatmap", &h.spec));
    }
    let v = vision.channels();
    let h = heatmaps.len();
    let b = imu_bones.channels();
    let mut data = Vec::with_capacity((v + h + b) * spec.num_voxels());
    data.extend(vision.data().iter().map(|&x| f64::from(x)));
    for hm in heatmaps {
        data.extend_from_slice(hm.values());
    }
    data.extend(imu_bones.data().iter().map(|&x| f64::from(x)));
    Ok(RefinementInput {
        spec,
        channels: v + h + b,
        data,
        vision: 0..v,
        heatmaps: v..v + h,
        imu_bones: v + h..v + h + b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn grid() -> GridSpec {
        GridSpec::centered_on(Vec3::zeros(), [32; 3], 70.0).unwrap()
    }

    #[test]
    fn channel_arithmetic_and_ranges() {
        let vision = MultiChannelVolume::zeros(grid(), 8);
        let heatmaps: Vec<_> = (0..13)
            .map(|j| HeatmapVolume::new(grid(), vec![j as f64 - 4.5; 32 * 32 * 32]).unwrap())
            .collect();
        let bones = MultiChannelVolume::from_data(grid(), 13, vec![1.0; 13 * 32 * 32 * 32]).unwrap();
        let input = concat_refinement_input(&vision, &heatmaps, &bones).unwrap();
        assert_eq!(input.shape(), [34, 32, 32, 32]);
        assert_eq!((input.vision.clone(), input.heatmaps.clone(), input.imu_bones.clone()), (0..8, 8..21, 21..34));
        for (j, hm) in heatmaps.iter().enumerate() {
            assert_eq!(input.channel(8 + j), hm.values());
        }
        assert!(input.channel(33).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn pooled_vision_lines_up_with_heatmap_grid() {
        let fine = GridSpec::centered_on(Vec3::zeros(), [64; 3], 35.0).unwrap();
        let mut vision = MultiChannelVolume::zeros(fine, 2);
        vision.channel_mut(1)[fine.linear_index(10, 11, 12)] = 1.0;
        let pooled = vision.average_pool_2x().unwrap();
        let bones = MultiChannelVolume::zeros(grid(), 1);
        let input = concat_refinement_input(&pooled, &[], &bones).unwrap();
        assert_eq!(input.shape(), [3, 32, 32, 32]);
        assert!(input.heatmaps.is_empty());
        assert_eq!(input.channel(1)[grid().linear_index(5, 5, 6)], 0.125);
        assert!(concat_refinement_input(&vision, &[], &bones).is_err());
    }
}
