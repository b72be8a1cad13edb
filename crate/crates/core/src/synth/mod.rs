//! Synthetic articulated scenes and brute-force references.
//!
//! All randomness flows from one 64-bit seed: a scene seeds a ChaCha8 stream
//! with it directly, and multi-frame sequences key frame `n` with
//! [`derive_seed`](crate::volume::derive_seed)`(seed, n)`. ChaCha output is
//! specified bit-for-bit, so scenes are identical on every platform.

mod oracle;
mod render;
pub mod skeleton;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use oracle::{
    brute_force_voxelize, occupancy_reference, quantization_error_mc, CUBE_MEAN_DISTANCE,
};
pub use render::render_silhouette;

use crate::error::{Error, Result};
use crate::fusion::{HeatmapVolume, Pose, SkeletonTopology};
use crate::geometry::{
    imu_apply_wear_offset, imu_local_to_global, CameraModel, GridSpec, Quaternion, Vec3, UP,
};
use skeleton::{BONE_RADII, CONNECTOR_RADIUS, HEAD_RADIUS, IMU_BONES, SEGMENTS};

/// Closed-form body primitive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    Sphere { center: Vec3, radius: f64 },
    /// Cylinder from `a` to `b` with hemispherical caps.
    Capsule { a: Vec3, b: Vec3, radius: f64 },
}

impl Primitive {
    pub fn contains(&self, p: &Vec3) -> bool {
        match *self {
            Primitive::Sphere { center, radius } => (p - center).norm() <= radius,
            Primitive::Capsule { a, b, radius } => point_segment_distance(p, &a, &b) <= radius,
        }
    }

    /// Whether the half-line `origin + t * dir`, `t >= 0`, touches the primitive.
    pub fn hit_by_ray(&self, origin: &Vec3, dir: &Vec3) -> bool {
        match *self {
            Primitive::Sphere { center, radius } => {
                crate::fusion::distance_to_half_line(&center, origin, dir) <= radius
            }
            Primitive::Capsule { a, b, radius } => ray_segment_distance(origin, dir, &a, &b) <= radius,
        }
    }

    /// Corners of an axis-aligned box enclosing the primitive.
    pub(crate) fn bounding_corners(&self) -> [Vec3; 8] {
        let (lo, hi) = match *self {
            Primitive::Sphere { center, radius } => (center - Vec3::repeat(radius), center + Vec3::repeat(radius)),
            Primitive::Capsule { a, b, radius } => (
                a.inf(&b) - Vec3::repeat(radius),
                a.sup(&b) + Vec3::repeat(radius),
            ),
        };
        let mut out = [lo; 8];
        for (n, c) in out.iter_mut().enumerate() {
            *c = Vec3::new(
                if n & 1 == 0 { lo.x } else { hi.x },
                if n & 2 == 0 { lo.y } else { hi.y },
                if n & 4 == 0 { lo.z } else { hi.z },
            );
        }
        out
    }
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * s)).norm()
}

/// Distance between the ray `o + t d` (t >= 0) and segment `[a, b]`.
fn ray_segment_distance(o: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let e_dir = b - a;
    let seg_len2 = e_dir.norm_squared();
    if seg_len2 <= 1e-18 {
        return crate::fusion::distance_to_half_line(a, o, d);
    }
    let r = o - a;
    let aa = d.dot(d);
    let bb = d.dot(&e_dir);
    let cc = d.dot(&r);
    let ff = e_dir.dot(&r);
    let denom = aa * seg_len2 - bb * bb;
    let mut t = if denom > 1e-12 * aa * seg_len2 {
        ((bb * ff - cc * seg_len2) / denom).max(0.0)
    } else {
        0.0
    };
    let s = (bb * t + ff) / seg_len2;
    if s < 0.0 {
        t = (-cc / aa).max(0.0);
    } else if s > 1.0 {
        t = ((bb - cc) / aa).max(0.0);
    }
    // Re-clamp the segment parameter against the final ray parameter.
    let s = ((bb * t + ff) / seg_len2).clamp(0.0, 1.0);
    ((o + d * t) - (a + e_dir * s)).norm()
}

/// Camera rig and body-shape parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneParams {
    pub image_width: u32,
    pub image_height: u32,
    pub focal_px: f64,
    pub ring_radius: f64,
    /// Mean camera height; odd cameras sit `height_stagger` above it, even
    /// ones the same amount below.
    pub camera_height: f64,
    pub height_stagger: f64,
    /// Point every ring camera looks at.
    pub look_at: Vec3,
    /// Largest random rotation (radians) of the torso bones.
    pub torso_swing: f64,
    /// Largest random rotation (radians) of limb bones.
    pub limb_swing: f64,
    /// Per-axis uniform IMU angular jitter, radians (0 = exact orientations).
    pub imu_jitter: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            image_width: 640,
            image_height: 480,
            focal_px: 550.0,
            ring_radius: 4500.0,
            camera_height: 1500.0,
            height_stagger: 600.0,
            look_at: Vec3::new(0.0, 0.0, 900.0),
            torso_swing: 0.3,
            limb_swing: 0.8,
            imu_jitter: 0.0,
        }
    }
}

/// Ground-truth capture of one synthetic frame.
#[derive(Clone, Debug)]
pub struct SyntheticScene {
    pub cameras: Vec<CameraModel>,
    pub skeleton: Pose,
    pub primitives: Vec<Primitive>,
    /// Global bone orientation per IMU of [`skeleton::IMU_BONES`].
    pub imu_orientations: Vec<Quaternion>,
    pub topology: SkeletonTopology,
}

impl SyntheticScene {
    /// Root joint position.
    pub fn root(&self) -> Vec3 {
        self.skeleton.joints[skeleton::ROOT_JOINT]
    }

    /// Unit proximal→distal direction of IMU bone `i`.
    pub fn limb_direction(&self, i: usize) -> Vec3 {
        let (_, p, d) = IMU_BONES[i];
        (self.skeleton.joints[d] - self.skeleton.joints[p]).normalize()
    }
}

/// Cameras evenly spaced around a vertical ring axis at alternating heights,
/// all looking at `params.look_at`.
pub fn ring_cameras(num_cameras: usize, params: &SceneParams) -> Result<Vec<CameraModel>> {
    if num_cameras == 0 {
        return Err(Error::InvalidInput("need at least one camera".into()));
    }
    (0..num_cameras)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / num_cameras as f64;
            let eye = Vec3::new(
                params.ring_radius * angle.cos(),
                params.ring_radius * angle.sin(),
                params.camera_height + if k % 2 == 1 { params.height_stagger } else { -params.height_stagger },
            );
            CameraModel::look_at(
                format!("cam{k}"),
                eye,
                params.look_at,
                UP,
                params.focal_px,
                params.image_width,
                params.image_height,
            )
        })
        .collect()
}

fn random_rotation(rng: &mut ChaCha8Rng, max_angle: f64) -> Quaternion {
    let axis = loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            break v / n;
        }
    };
    Quaternion::from_axis_angle(axis, rng.random_range(-max_angle..=max_angle))
}

/// Deterministic random scene with default rig parameters.
pub fn generate_scene(seed: u64, num_cameras: usize, pose_spread: f64) -> Result<SyntheticScene> {
    generate_scene_with(seed, num_cameras, pose_spread, &SceneParams::default())
}

/// Random scene: ring cameras, a posed skeleton whose root lies within
/// `pose_spread` mm of the ring axis, capsule body primitives, and one global
/// bone orientation per IMU.
pub fn generate_scene_with(
    seed: u64,
    num_cameras: usize,
    pose_spread: f64,
    params: &SceneParams,
) -> Result<SyntheticScene> {
    let cameras = ring_cameras(num_cameras, params)?;
    let topology = skeleton::default_topology()?;
    let reference = skeleton::reference_pose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let heading = crate::geometry::vertical_axis_quaternion(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    let bone_scale = rng.random_range(0.9..1.1);
    let orientations: Vec<Quaternion> = (0..IMU_BONES.len())
        .map(|b| {
            let swing = if b <= 1 { params.torso_swing } else { params.limb_swing };
            heading.mul(&random_rotation(&mut rng, swing))
        })
        .collect();

    let spread = pose_spread.max(0.0);
    let (r, phi) = (spread * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
    let mut joints = reference.joints.clone();
    joints[skeleton::ROOT_JOINT] = reference.joints[skeleton::ROOT_JOINT] + Vec3::new(r * phi.cos(), r * phi.sin(), 0.0);
    for (joint, parent, bone) in SEGMENTS {
        let offset = (reference.joints[joint] - reference.joints[parent]) * bone_scale;
        joints[joint] = joints[parent] + orientations[bone].rotate(&offset);
    }
    let skeleton = Pose::new(reference.joint_names.clone(), joints)?;

    let mut primitives: Vec<Primitive> = SEGMENTS
        .iter()
        .map(|&(joint, parent, bone)| {
            let is_bone = IMU_BONES[bone].1 == parent && IMU_BONES[bone].2 == joint;
            Primitive::Capsule {
                a: skeleton.joints[parent],
                b: skeleton.joints[joint],
                radius: if is_bone { BONE_RADII[bone] } else { CONNECTOR_RADIUS },
            }
        })
        .collect();
    primitives.push(Primitive::Sphere {
        center: skeleton.joints[3],
        radius: HEAD_RADIUS,
    });

    let imu_orientations = if params.imu_jitter > 0.0 {
        orientations
            .iter()
            .map(|q| {
                let j = params.imu_jitter;
                let jitter = Quaternion::from_axis_angle(Vec3::x(), rng.random_range(-j..=j))
                    .mul(&Quaternion::from_axis_angle(Vec3::y(), rng.random_range(-j..=j)))
                    .mul(&Quaternion::from_axis_angle(Vec3::z(), rng.random_range(-j..=j)));
                jitter.mul(q)
            })
            .collect()
    } else {
        orientations
    };

    Ok(SyntheticScene {
        cameras,
        skeleton,
        primitives,
        imu_orientations,
        topology,
    })
}

/// Per-sensor calibration constants relating raw readings to bone orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct ImuCalibration {
    pub local_to_global: Vec<Quaternion>,
    pub wear: Vec<Quaternion>,
}

impl ImuCalibration {
    pub fn random(seed: u64, sensors: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let local_to_global = (0..sensors).map(|_| random_rotation(&mut rng, std::f64::consts::PI)).collect();
        let wear = (0..sensors).map(|_| random_rotation(&mut rng, std::f64::consts::PI)).collect();
        Self {
            local_to_global,
            wear,
        }
    }

    pub fn identity(sensors: usize) -> Self {
        Self {
            local_to_global: vec![Quaternion::IDENTITY; sensors],
            wear: vec![Quaternion::IDENTITY; sensors],
        }
    }

    /// Raw local-frame readings that calibrate back to `bone_orientations`:
    /// `global = wear ⊗ bone`, `local = global ⊗ local_to_global*`.
    pub fn local_readings(&self, bone_orientations: &[Quaternion]) -> Vec<Quaternion> {
        bone_orientations
            .iter()
            .zip(self.local_to_global.iter().zip(&self.wear))
            .map(|(bone, (l2g, wear))| wear.mul(bone).mul(&l2g.conjugate()))
            .collect()
    }

    /// Bone orientations from raw local readings.
    pub fn calibrate(&self, local: &[Quaternion]) -> Vec<Quaternion> {
        local
            .iter()
            .zip(self.local_to_global.iter().zip(&self.wear))
            .map(|(q, (l2g, wear))| imu_apply_wear_offset(wear, &imu_local_to_global(q, l2g)))
            .collect()
    }
}

/// Heatmap whose tempered softmax at `theta` is a discrete isotropic Gaussian
/// of `sigma_voxels` centered on `target`: scores `-|i - c|² / (2 σ² θ)`.
pub fn gaussian_heatmap(spec: &GridSpec, target: &Vec3, sigma_voxels: f64, theta: f64) -> Result<HeatmapVolume> {
    if !(sigma_voxels > 0.0 && theta > 0.0) {
        return Err(Error::InvalidInput("sigma and theta must be positive".into()));
    }
    let c = spec.world_to_index(target);
    let scale = 1.0 / (2.0 * sigma_voxels * sigma_voxels * theta);
    HeatmapVolume::from_fn(*spec, |i, j, k| {
        -(Vec3::new(i as f64, j as f64, k as f64) - c).norm_squared() * scale
    })
}

/// One [`gaussian_heatmap`] per joint of `pose`.
pub fn pose_heatmaps(pose: &Pose, spec: &GridSpec, sigma_voxels: f64, theta: f64) -> Result<Vec<HeatmapVolume>> {
    pose.joints
        .iter()
        .map(|j| gaussian_heatmap(spec, j, sigma_voxels, theta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{soft_argmax_3d, SoftArgmaxParams};

    #[test]
    fn scenes_are_deterministic() {
        let a = generate_scene(42, 8, 300.0).unwrap();
        let b = generate_scene(42, 8, 300.0).unwrap();
        assert_eq!(a.skeleton, b.skeleton);
        assert_eq!(a.primitives, b.primitives);
        assert_eq!(a.imu_orientations, b.imu_orientations);
        assert_eq!(a.cameras, b.cameras);
        assert_eq!(a.cameras.len(), 8);
        let c = generate_scene(43, 8, 300.0).unwrap();
        assert_ne!(a.skeleton, c.skeleton);
        assert!(generate_scene(1, 0, 0.0).is_err());
    }

    #[test]
    fn imu_orientations_reproduce_limbs() {
        for seed in 0..50 {
            let scene = generate_scene(seed, 4, 500.0).unwrap();
            for (i, entry) in scene.topology.entries.iter().enumerate() {
                let d = scene.imu_orientations[i].rotate(&entry.canonical_direction);
                assert!((d - scene.limb_direction(i)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn joints_lie_inside_primitives() {
        let scene = generate_scene(9, 8, 400.0).unwrap();
        for j in &scene.skeleton.joints {
            assert!(scene.primitives.iter().any(|p| p.contains(j)));
        }
    }

    #[test]
    fn root_respects_spread() {
        for seed in 0..30 {
            let scene = generate_scene(seed, 1, 250.0).unwrap();
            let root = scene.root();
            assert!(Vec3::new(root.x, root.y, 0.0).norm() <= 250.0 + 1e-9);
        }
    }

    #[test]
    fn calibration_round_trip() {
        let scene = generate_scene(3, 1, 0.0).unwrap();
        let calib = ImuCalibration::random(77, 13);
        let local = calib.local_readings(&scene.imu_orientations);
        let back = calib.calibrate(&local);
        for (a, b) in back.iter().zip(&scene.imu_orientations) {
            assert!(a.rotation_distance(b) < 1e-9);
        }
    }

    #[test]
    fn gaussian_heatmap_peaks_at_target() {
        let spec = GridSpec::centered_on(Vec3::zeros(), [32; 3], 70.0).unwrap();
        let target = Vec3::new(123.0, -456.0, 78.9);
        let h = gaussian_heatmap(&spec, &target, 1.5, 3.0).unwrap();
        let s = soft_argmax_3d(&h, &SoftArgmaxParams::new(3.0).unwrap()).unwrap();
        assert!((s.world - target).norm() < 0.25 * spec.voxel_size);
    }

    #[test]
    fn ray_segment_distance_cases() {
        let o = Vec3::zeros();
        let d = Vec3::x();
        // Segment crossing the ray above it.
        let dist = ray_segment_distance(&o, &d, &Vec3::new(5.0, -1.0, 2.0), &Vec3::new(5.0, 1.0, 2.0));
        assert!((dist - 2.0).abs() < 1e-12);
        // Segment behind the ray origin: distance from the origin.
        let dist = ray_segment_distance(&o, &d, &Vec3::new(-5.0, 3.0, 0.0), &Vec3::new(-3.0, 4.0, 0.0));
        assert!((dist - 5.0).abs() < 1e-9);
        // Parallel segment.
        let dist = ray_segment_distance(&o, &d, &Vec3::new(1.0, 0.0, 3.0), &Vec3::new(4.0, 0.0, 3.0));
        assert!((dist - 3.0).abs() < 1e-12);
        // Endpoint closest.
        let dist = ray_segment_distance(&o, &d, &Vec3::new(2.0, 1.0, 0.0), &Vec3::new(2.0, 5.0, 0.0));
        assert!((dist - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_segment_matches_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut v = || Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        for _ in 0..200 {
            let (o, d, a, b) = (v(), v().normalize(), v(), v());
            let exact = ray_segment_distance(&o, &d, &a, &b);
            let mut best = f64::INFINITY;
            for ti in 0..=400 {
                let t = ti as f64 * 0.05;
                best = best.min(point_segment_distance(&(o + d * t), &a, &b));
            }
            assert!(exact <= best + 1e-9);
            assert!(best - exact < 0.05);
        }
    }
}
