use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::volume::SilhouetteImage;

/// Reads an 8-bit grayscale PGM (`P5`) or PNG matte and thresholds it.
/// Color images are converted to luma first.
pub fn read_silhouette(path: &Path) -> Result<SilhouetteImage> {
    let gray = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()?
        .into_luma8();
    SilhouetteImage::from_gray(gray.width(), gray.height(), gray.as_raw())
}

/// Writes a binary `P5` PGM with foreground at 255.
pub fn write_pgm(path: &Path, silhouette: &SilhouetteImage) -> Result<()> {
    let mut out = Vec::with_capacity(silhouette.pixels().len() + 32);
    write!(out, "P5\n{} {}\n255\n", silhouette.width, silhouette.height)?;
    out.extend_from_slice(&silhouette.to_gray());
    fs::write(path, out)?;
    Ok(())
}
