use super::{MultiChannelVolume, VoxelGrid};
use crate::geometry::Vec3;

/// Voxelwise logical AND over all channels (the classical visual hull).
///
/// Diagnostic only; fusion layers consume the unfused channels.
pub fn visual_hull(volume: &MultiChannelVolume) -> VoxelGrid {
    let mut hull = volume.channel_grid(0);
    for k in 1..volume.channels() {
        let channel = volume.channel(k);
        let data: Vec<u8> = hull
            .data()
            .iter()
            .zip(channel)
            .map(|(&h, &c)| u8::from(h != 0 && c >= 0.5))
            .collect();
        hull = VoxelGrid::from_data(hull.spec, data).expect("same grid");
    }
    hull
}

/// Mean world position of occupied voxel centers.
pub fn occupancy_centroid(grid: &VoxelGrid) -> Option<Vec3> {
    let mut sum = Vec3::zeros();
    let mut count = 0usize;
    for (n, &v) in grid.data().iter().enumerate() {
        if v != 0 {
            let [i, j, k] = grid.spec.index_triple(n);
            sum += grid.spec.voxel_center(i, j, k);
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;

    fn spec() -> GridSpec {
        GridSpec::new(Vec3::zeros(), [3, 3, 3], 10.0).unwrap()
    }

    #[test]
    fn single_channel_hull_is_channel() {
        let mut g = VoxelGrid::empty(spec());
        g.set(1, 2, 0, true);
        let vol = MultiChannelVolume::from_grids(&[g.clone()]).unwrap();
        assert_eq!(visual_hull(&vol), g);
    }

    #[test]
    fn empty_channel_empties_hull() {
        let mut g = VoxelGrid::empty(spec());
        g.set(1, 1, 1, true);
        let vol = MultiChannelVolume::from_grids(&[g.clone(), VoxelGrid::empty(spec()), g]).unwrap();
        assert_eq!(visual_hull(&vol).occupied_count(), 0);
    }

    #[test]
    fn hull_is_below_every_channel() {
        let mut a = VoxelGrid::empty(spec());
        let mut b = VoxelGrid::empty(spec());
        for n in 0..27 {
            let [i, j, k] = spec().index_triple(n);
            a.set(i, j, k, n % 2 == 0);
            b.set(i, j, k, n % 3 == 0);
        }
        let vol = MultiChannelVolume::from_grids(&[a.clone(), b.clone()]).unwrap();
        let hull = visual_hull(&vol);
        for (n, &h) in hull.data().iter().enumerate() {
            assert!(h <= a.data()[n] && h <= b.data()[n]);
            assert_eq!(h == 1, n % 6 == 0);
        }
    }

    #[test]
    fn centroid_of_symmetric_pair() {
        let mut g = VoxelGrid::empty(spec());
        assert_eq!(occupancy_centroid(&g), None);
        g.set(0, 0, 0, true);
        g.set(2, 2, 2, true);
        assert_eq!(occupancy_centroid(&g), Some(Vec3::repeat(15.0)));
    }
}
