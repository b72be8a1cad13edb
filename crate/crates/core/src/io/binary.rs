use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fusion::HeatmapVolume;
use crate::geometry::{GridSpec, Vec3};
use crate::volume::MultiChannelVolume;

const VOLUME_MAGIC: &[u8; 4] = b"MCV1";
const HEATMAP_MAGIC: &[u8; 4] = b"HM3D";

fn write_header(w: &mut impl Write, magic: &[u8; 4], ints: [u32; 4], spec: &GridSpec) -> Result<()> {
    w.write_all(magic)?;
    for v in ints {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [spec.origin.x, spec.origin.y, spec.origin.z, spec.voxel_size] {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

fn read_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<([u32; 4], [f32; 4])> {
    let mut tag = [0u8; 4];
    r.read_exact(&mut tag)?;
    if &tag != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&tag),
            String::from_utf8_lossy(magic)
        )));
    }
    let mut buf = [0u8; 4];
    let mut ints = [0u32; 4];
    for v in &mut ints {
        r.read_exact(&mut buf)?;
        *v = u32::from_le_bytes(buf);
    }
    let mut floats = [0f32; 4];
    for v in &mut floats {
        r.read_exact(&mut buf)?;
        *v = f32::from_le_bytes(buf);
    }
    Ok((ints, floats))
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} exceeds u32")))
}

fn spec_from(dims: [u32; 3], floats: [f32; 4]) -> Result<GridSpec> {
    GridSpec::new(
        Vec3::new(floats[0] as f64, floats[1] as f64, floats[2] as f64),
        dims.map(|d| d as usize),
        floats[3] as f64,
    )
    .map_err(|e| Error::Format(format!("invalid grid header: {e}")))
}

/// Writes a binary volume as `MCV1`. Fractional occupancy is rejected.
pub fn write_volume(w: &mut impl Write, volume: &MultiChannelVolume) -> Result<()> {
    if !volume.is_binary() {
        return Err(Error::Format("MCV1 stores binary volumes only".into()));
    }
    let [c, nx, ny, nz] = volume.shape();
    write_header(
        w,
        VOLUME_MAGIC,
        [to_u32(c, "channels")?, to_u32(nx, "nx")?, to_u32(ny, "ny")?, to_u32(nz, "nz")?],
        &volume.spec,
    )?;
    let payload: Vec<u8> = volume.data().iter().map(|&v| v as u8).collect();
    w.write_all(&payload)?;
    Ok(())
}

pub fn read_volume(r: &mut impl Read) -> Result<MultiChannelVolume> {
    let ([c, nx, ny, nz], floats) = read_header(r, VOLUME_MAGIC)?;
    let spec = spec_from([nx, ny, nz], floats)?;
    let len = (c as usize)
        .checked_mul(spec.num_voxels())
        .ok_or_else(|| Error::Format("volume size overflows".into()))?;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)
        .map_err(|e| Error::Format(format!("truncated MCV1 payload: {e}")))?;
    if payload.iter().any(|&v| v > 1) {
        return Err(Error::Format("MCV1 payload must be 0 or 1".into()));
    }
    MultiChannelVolume::from_data(spec, c as usize, payload.into_iter().map(f32::from).collect())
}

/// Writes per-joint heatmaps sharing one grid as `HM3D`.
pub fn write_heatmaps(w: &mut impl Write, heatmaps: &[HeatmapVolume]) -> Result<()> {
    let first = heatmaps
        .first()
        .ok_or_else(|| Error::Format("HM3D needs at least one heatmap".into()))?;
    if heatmaps.iter().any(|h| h.spec != first.spec) {
        return Err(Error::Format("HM3D heatmaps must share one grid".into()));
    }
    let [nx, ny, nz] = first.spec.dims;
    write_header(
        w,
        HEATMAP_MAGIC,
        [to_u32(nx, "nx")?, to_u32(ny, "ny")?, to_u32(nz, "nz")?, to_u32(heatmaps.len(), "joint count")?],
        &first.spec,
    )?;
    let mut payload = Vec::with_capacity(4 * heatmaps.len() * first.spec.num_voxels());
    for h in heatmaps {
        for &v in h.values() {
            payload.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    w.write_all(&payload)?;
    Ok(())
}

pub fn read_heatmaps(r: &mut impl Read) -> Result<Vec<HeatmapVolume>> {
    let ([nx, ny, nz, joints], floats) = read_header(r, HEATMAP_MAGIC)?;
    let spec = spec_from([nx, ny, nz], floats)?;
    let n = spec.num_voxels();
    let mut bytes = vec![0u8; 4 * n];
    (0..joints)
        .map(|j| {
            r.read_exact(&mut bytes)
                .map_err(|e| Error::Format(format!("truncated HM3D payload at joint {j}: {e}")))?;
            let values = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            HeatmapVolume::new(spec, values)
        })
        .collect()
}
