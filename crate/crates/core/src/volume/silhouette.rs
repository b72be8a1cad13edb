use crate::error::{Error, Result};

/// 8-bit matte values at or above this are foreground.
pub const FOREGROUND_THRESHOLD: u8 = 128;

/// Binary foreground mask, row-major, 1 = subject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SilhouetteImage {
    pub width: u32,
    pub height: u32,
    pixels: Vec<u8>,
}

impl SilhouetteImage {
    /// Builds from strictly binary pixel values.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("silhouette dimensions must be positive".into()));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidInput(format!(
                "silhouette has {} pixels, expected {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if pixels.iter().any(|&p| p > 1) {
            return Err(Error::InvalidInput("silhouette pixels must be 0 or 1".into()));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Thresholds an 8-bit grayscale matte at [`FOREGROUND_THRESHOLD`].
    pub fn from_gray(width: u32, height: u32, gray: &[u8]) -> Result<Self> {
        let pixels = gray.iter().map(|&g| u8::from(g >= FOREGROUND_THRESHOLD)).collect();
        Self::new(width, height, pixels)
    }

    pub fn filled(width: u32, height: u32, foreground: bool) -> Self {
        Self {
            width,
            height,
            pixels: vec![u8::from(foreground); width as usize * height as usize],
        }
    }

    /// Pixel `(x, y)`; column `x`, row `y`.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.pixels[y as usize * self.width as usize + x as usize] != 0
    }

    pub fn set(&mut self, x: u32, y: u32, foreground: bool) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = u8::from(foreground);
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }

    /// 0/255 grayscale rendering for image files.
    pub fn to_gray(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| if p != 0 { 255 } else { 0 }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_gray_values() {
        let s = SilhouetteImage::from_gray(4, 1, &[0, 127, 128, 255]).unwrap();
        assert_eq!(s.pixels(), &[0, 0, 1, 1]);
        assert_eq!(s.foreground_count(), 2);
        assert_eq!(s.to_gray(), vec![0, 0, 255, 255]);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(SilhouetteImage::new(2, 2, vec![0; 3]).is_err());
        assert!(SilhouetteImage::new(2, 1, vec![0, 2]).is_err());
        assert!(SilhouetteImage::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn row_major_addressing() {
        let mut s = SilhouetteImage::filled(3, 2, false);
        s.set(2, 1, true);
        assert!(s.get(2, 1));
        assert_eq!(s.pixels()[5], 1);
    }
}
