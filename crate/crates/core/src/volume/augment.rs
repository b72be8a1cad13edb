use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MultiChannelVolume;
use crate::error::{Error, Result};
use crate::fusion::Pose;
use crate::geometry::{vertical_axis_quaternion, CameraModel, Quaternion, Vec3};

/// Independent 64-bit seed for item `index` of a run seeded with `base`
/// (SplitMix64 finalizer over `base + (index + 1) * golden_gamma`).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Zeroes each channel independently with `probability`.
///
/// Decisions come from a ChaCha8 stream keyed by `rng_seed`, one uniform draw
/// per channel in channel order. Returns the augmented copy and the indices of
/// the dropped channels.
pub fn random_shut(
    volume: &MultiChannelVolume,
    probability: f64,
    rng_seed: u64,
) -> Result<(MultiChannelVolume, Vec<usize>)> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::InvalidInput(format!(
            "random shut probability must be in [0, 1], got {probability}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let dropped: Vec<usize> = (0..volume.channels())
        .filter(|_| rng.random::<f64>() < probability)
        .collect();
    let mut out = volume.clone();
    for &k in &dropped {
        out.channel_mut(k).fill(0.0);
    }
    Ok((out, dropped))
}

/// Uniform angle in `[-max_abs, max_abs]` radians from a ChaCha8 stream keyed
/// by `rng_seed`.
pub fn sample_rotation_angle(max_abs: f64, rng_seed: u64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&max_abs) {
        return Err(Error::InvalidInput(format!(
            "rotation range must be in [0, pi], got {max_abs}"
        )));
    }
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok(rng.random_range(-max_abs..=max_abs))
}

#[derive(Clone, Debug)]
pub struct RotatedScene {
    pub cameras: Vec<CameraModel>,
    pub gt: Pose,
    pub imu: Vec<Quaternion>,
}

/// Rotates a whole capture about the vertical axis through `center`.
///
/// Cameras get the inverse motion folded into their extrinsics, so carving the
/// unchanged silhouettes produces the rotated volume; joints are rotated about
/// `center`; global IMU orientations are left-multiplied by the rotation.
pub fn rotate_scene(
    angle: f64,
    center: &Vec3,
    cameras: &[CameraModel],
    gt: &Pose,
    imu: &[Quaternion],
) -> Result<RotatedScene> {
    if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&angle) {
        return Err(Error::InvalidInput(format!(
            "rotation angle {angle} outside [-pi, pi]"
        )));
    }
    if angle == 0.0 {
        return Ok(RotatedScene {
            cameras: cameras.to_vec(),
            gt: gt.clone(),
            imu: imu.to_vec(),
        });
    }
    let q = vertical_axis_quaternion(angle);
    let cameras = cameras
        .iter()
        .map(|c| c.with_world_rotation(&q, center))
        .collect();
    let gt = gt.map_joints(|p| center + q.rotate(&(p - center)));
    let imu = imu.iter().map(|o| q.mul(o)).collect();
    Ok(RotatedScene { cameras, gt, imu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;
    use std::f64::consts::PI;

    fn volume(channels: usize) -> MultiChannelVolume {
        let spec = GridSpec::new(Vec3::zeros(), [2; 3], 1.0).unwrap();
        MultiChannelVolume::from_data(spec, channels, vec![1.0; channels * 8]).unwrap()
    }

    #[test]
    fn rotation_angles_stay_in_range() {
        for seed in 0..200 {
            let a = sample_rotation_angle(0.5, seed).unwrap();
            assert!(a.abs() <= 0.5);
            assert_eq!(a, sample_rotation_angle(0.5, seed).unwrap());
        }
        assert_eq!(sample_rotation_angle(0.0, 9).unwrap(), 0.0);
        assert!(sample_rotation_angle(4.0, 9).is_err());
    }

    #[test]
    fn probability_extremes() {
        let v = volume(8);
        let (same, dropped) = random_shut(&v, 0.0, 3).unwrap();
        assert_eq!(same, v);
        assert!(dropped.is_empty());
        let (zero, dropped) = random_shut(&v, 1.0, 3).unwrap();
        assert!(zero.data().iter().all(|&x| x == 0.0));
        assert_eq!(dropped, (0..8).collect::<Vec<_>>());
        assert!(random_shut(&v, 1.5, 3).is_err());
    }

    #[test]
    fn drops_are_seeded_and_input_untouched() {
        let v = volume(8);
        let a = random_shut(&v, 0.5, 99).unwrap();
        let b = random_shut(&v, 0.5, 99).unwrap();
        assert_eq!(a, b);
        assert!(v.data().iter().all(|&x| x == 1.0));
        for k in 0..8 {
            assert_eq!(a.0.channel_is_empty(k), a.1.contains(&k));
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    fn pose() -> Pose {
        Pose::new(
            vec!["a".into(), "b".into()],
            vec![Vec3::new(100.0, 20.0, 900.0), Vec3::new(-50.0, 300.0, 1200.0)],
        )
        .unwrap()
    }

    fn camera() -> CameraModel {
        CameraModel::look_at("c", Vec3::new(3000.0, 0.0, 1500.0), Vec3::new(0.0, 0.0, 1000.0), Vec3::z(), 500.0, 320, 240)
            .unwrap()
    }

    #[test]
    fn zero_angle_is_identity() {
        let q = vec![Quaternion::from_axis_angle(Vec3::x(), 0.3)];
        let r = rotate_scene(0.0, &Vec3::zeros(), &[camera()], &pose(), &q).unwrap();
        assert_eq!(r.cameras, vec![camera()]);
        assert_eq!(r.gt, pose());
        assert_eq!(r.imu, q);
    }

    #[test]
    fn half_turn_twice_restores_scene() {
        let center = Vec3::new(10.0, 20.0, 900.0);
        let q = vec![Quaternion::from_axis_angle(Vec3::new(1.0, 1.0, 0.0), 0.9)];
        let once = rotate_scene(PI, &center, &[camera()], &pose(), &q).unwrap();
        let twice = rotate_scene(PI, &center, &once.cameras, &once.gt, &once.imu).unwrap();
        for (a, b) in twice.gt.joints.iter().zip(&pose().joints) {
            assert!((a - b).norm() < 1e-6);
        }
        assert!((twice.cameras[0].extrinsics - camera().extrinsics).abs().max() < 1e-6);
        assert!(twice.imu[0].rotation_distance(&q[0]) < 1e-6);
        assert!(rotate_scene(4.0, &center, &[], &pose(), &[]).is_err());
    }

    #[test]
    fn rotation_keeps_projection_consistent() {
        let center = Vec3::new(0.0, 0.0, 1000.0);
        let r = rotate_scene(1.2, &center, &[camera()], &pose(), &[]).unwrap();
        for (orig, rot) in pose().joints.iter().zip(&r.gt.joints) {
            let a = camera().project_point(orig).unwrap();
            let b = r.cameras[0].project_point(rot).unwrap();
            assert!((a.u - b.u).abs() < 1e-9 && (a.v - b.v).abs() < 1e-9);
        }
    }
}
