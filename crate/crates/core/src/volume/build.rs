use rayon::prelude::*;

use super::{occupancy_centroid, visual_hull, MultiChannelVolume, SilhouetteImage, VoxelGrid};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, GridSpec, Vec3};

/// Carves one occupancy channel: a voxel is 1 iff its center projects in
/// front of the camera onto an in-bounds foreground pixel (nearest-pixel
/// sampling, pixel centers at integer coordinates).
pub fn build_channel(
    camera: &CameraModel,
    silhouette: &SilhouetteImage,
    spec: &GridSpec,
) -> Result<VoxelGrid> {
    if camera.width != silhouette.width || camera.height != silhouette.height {
        return Err(Error::Config(format!(
            "camera {} expects {}x{} images, silhouette is {}x{}",
            camera.name, camera.width, camera.height, silhouette.width, silhouette.height
        )));
    }
    spec.validate()?;
    let [nx, ny, _] = spec.dims;
    let mut data = vec![0u8; spec.num_voxels()];
    data.par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slice)| {
            for j in 0..ny {
                for i in 0..nx {
                    let center = spec.voxel_center(i, j, k);
                    slice[i + nx * j] = u8::from(samples_foreground(camera, silhouette, &center));
                }
            }
        });
    VoxelGrid::from_data(*spec, data)
}

fn samples_foreground(camera: &CameraModel, silhouette: &SilhouetteImage, point: &Vec3) -> bool {
    let Ok(p) = camera.project_point(point) else {
        return false;
    };
    if !p.in_front {
        return false;
    }
    let (x, y) = (p.u.round(), p.v.round());
    if x < 0.0 || y < 0.0 || x >= silhouette.width as f64 || y >= silhouette.height as f64 {
        return false;
    }
    silhouette.get(x as u32, y as u32)
}

/// One channel per camera, stacked without any cross-channel fusion.
pub fn build_multichannel(
    cameras: &[CameraModel],
    silhouettes: &[SilhouetteImage],
    spec: &GridSpec,
) -> Result<MultiChannelVolume> {
    if cameras.is_empty() {
        return Err(Error::Config("no cameras given".into()));
    }
    if cameras.len() != silhouettes.len() {
        return Err(Error::Config(format!(
            "{} cameras but {} silhouettes",
            cameras.len(),
            silhouettes.len()
        )));
    }
    let grids = cameras
        .par_iter()
        .zip(silhouettes.par_iter())
        .map(|(c, s)| build_channel(c, s, spec))
        .collect::<Result<Vec<_>>>()?;
    MultiChannelVolume::from_grids(&grids)
}

/// Grid of the given resolution whose world-space center is `subject_center`.
pub fn center_grid_on(subject_center: Vec3, dims: [usize; 3], voxel_size: f64) -> Result<GridSpec> {
    GridSpec::centered_on(subject_center, dims, voxel_size)
}

/// Least-squares meeting point of the cameras' optical axes, the natural
/// place to search for the subject. `None` when the axes are (near) parallel.
pub fn rig_focus(cameras: &[CameraModel]) -> Option<Vec3> {
    let mut a = nalgebra::Matrix3::<f64>::zeros();
    let mut b = Vec3::zeros();
    for c in cameras {
        let axis: Vec3 = c.rotation().row(2).transpose();
        let proj = nalgebra::Matrix3::identity() - axis * axis.transpose();
        a += proj;
        b += proj * c.center();
    }
    let eig = a.symmetric_eigenvalues();
    if cameras.is_empty() || eig.min() < 1e-6 * eig.max().max(1e-300) {
        return None;
    }
    a.try_inverse().map(|inv| inv * b)
}

/// Subject center from a coarse carving pass: centroid of the visual hull on
/// `coarse`. Views that see nothing inside `coarse` are left out of the
/// intersection. `None` when no view sees the subject or the hull is empty.
pub fn estimate_subject_center(
    cameras: &[CameraModel],
    silhouettes: &[SilhouetteImage],
    coarse: &GridSpec,
) -> Result<Option<Vec3>> {
    let volume = build_multichannel(cameras, silhouettes, coarse)?;
    let seen: Vec<VoxelGrid> = (0..volume.channels())
        .filter(|&k| !volume.channel_is_empty(k))
        .map(|k| volume.channel_grid(k))
        .collect();
    if seen.is_empty() {
        return Ok(None);
    }
    Ok(occupancy_centroid(&visual_hull(&MultiChannelVolume::from_grids(&seen)?)))
}
