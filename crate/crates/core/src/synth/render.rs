use rayon::prelude::*;

use super::{Primitive, SyntheticScene};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Vec3};
use crate::volume::SilhouetteImage;

/// Pixel bounding box `[x0, x1] × [y0, y1]` (inclusive) outside which a
/// primitive cannot appear, or `None` if it is entirely behind the camera.
fn screen_bounds(camera: &CameraModel, primitive: &Primitive) -> Option<(i64, i64, i64, i64)> {
    let full = (0, camera.width as i64 - 1, 0, camera.height as i64 - 1);
    let p = camera.projection_matrix();
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    let mut behind = 0;
    let corners = primitive.bounding_corners();
    for c in &corners {
        let h = p * c.push(1.0);
        if h.z <= 1e-6 {
            behind += 1;
            continue;
        }
        let (u, v) = (h.x / h.z, h.y / h.z);
        xs = (xs.0.min(u), xs.1.max(u));
        ys = (ys.0.min(v), ys.1.max(v));
    }
    if behind == corners.len() {
        return None;
    }
    if behind > 0 {
        // Box straddles the camera plane; projected extent is unbounded.
        return Some(full);
    }
    Some((
        (xs.0.floor() as i64 - 1).max(full.0),
        (xs.1.ceil() as i64 + 1).min(full.1),
        (ys.0.floor() as i64 - 1).max(full.2),
        (ys.1.ceil() as i64 + 1).min(full.3),
    ))
}

/// Analytic silhouette: a pixel is foreground iff the camera ray through its
/// center (integer pixel coordinates) touches any body primitive.
pub fn render_silhouette(scene: &SyntheticScene, camera_index: usize) -> Result<SilhouetteImage> {
    let camera = scene.cameras.get(camera_index).ok_or_else(|| {
        Error::InvalidInput(format!(
            "camera index {camera_index} out of range for {} cameras",
            scene.cameras.len()
        ))
    })?;
    render_primitives(camera, &scene.primitives)
}

pub(crate) fn render_primitives(camera: &CameraModel, primitives: &[Primitive]) -> Result<SilhouetteImage> {
    let (w, h) = (camera.width as usize, camera.height as usize);
    let k_inv = camera
        .intrinsics
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("intrinsics are singular".into()))?;
    let r_t = camera.rotation().transpose();
    let origin = camera.center();
    let bounded: Vec<(Primitive, (i64, i64, i64, i64))> = primitives
        .iter()
        .filter_map(|p| screen_bounds(camera, p).map(|b| (*p, b)))
        .collect();

    let mut pixels = vec![0u8; w * h];
    pixels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let yi = y as i64;
        let active: Vec<&(Primitive, (i64, i64, i64, i64))> =
            bounded.iter().filter(|(_, b)| yi >= b.2 && yi <= b.3).collect();
        if active.is_empty() {
            return;
        }
        for (x, px) in row.iter_mut().enumerate() {
            let xi = x as i64;
            let mut dir: Option<Vec3> = None;
            for (prim, b) in &active {
                if xi < b.0 || xi > b.1 {
                    continue;
                }
                let d = *dir.get_or_insert_with(|| (r_t * (k_inv * Vec3::new(x as f64, y as f64, 1.0))).normalize());
                if prim.hit_by_ray(&origin, &d) {
                    *px = 1;
                    break;
                }
            }
        }
    });
    SilhouetteImage::new(camera.width, camera.height, pixels)
}
