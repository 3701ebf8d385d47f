//! Gray-scale and binary images, POI selection and patch extraction.

use crate::error::{HdcError, Result};

/// 8-bit gray-scale image stored row-major: pixel `(x, y)` is at
/// `y * width + x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(HdcError::InvalidConfig(format!(
                "image size {width}x{height} must be positive"
            )));
        }
        if pixels.len() != width * height {
            return Err(HdcError::LengthMismatch {
                what: "image pixels",
                left: pixels.len(),
                right: width * height,
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(HdcError::InvalidConfig(format!(
                "image size {width}x{height} must be positive"
            )));
        }
        if pixels.len() != width * height {
            return Err(HdcError::LengthMismatch {
                what: "image pixels",
                left: pixels.len(),
                right: width * height,
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Parse rows of `'1'`/`'#'` (set) and anything else (clear).
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let pixels = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '1' || c == '#'))
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Pixel value with zero padding outside the image.
    pub fn get_padded(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            false
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn count_ones(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// Copy shifted by `(dx, dy)`; uncovered pixels become 0.
    pub fn translated(&self, dx: isize, dy: isize) -> Self {
        let mut pixels = vec![false; self.pixels.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                pixels[y * self.width + x] = self.get_padded(x as isize - dx, y as isize - dy);
            }
        }
        Self {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// `z x z` neighbourhood of a POI. `pixels[j * z + i]` is the pixel at patch
/// column `i` (x offset `i - z/2`) and patch row `j` (y offset `j - z/2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    size: usize,
    center: (usize, usize),
    pixels: Vec<bool>,
}

impl Patch {
    pub fn new(size: usize, center: (usize, usize), pixels: Vec<bool>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(HdcError::InvalidConfig(format!(
                "patch size {size} must be odd"
            )));
        }
        if pixels.len() != size * size {
            return Err(HdcError::LengthMismatch {
                what: "patch pixels",
                left: pixels.len(),
                right: size * size,
            });
        }
        Ok(Self {
            size,
            center,
            pixels,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn center(&self) -> (usize, usize) {
        self.center
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.pixels[j * self.size + i]
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    /// Patch pixels packed LSB-first (patch sizes up to 7 fit in a `u64`).
    pub fn key(&self) -> u64 {
        debug_assert!(self.pixels.len() <= 64);
        self.pixels
            .iter()
            .enumerate()
            .fold(0u64, |k, (i, &p)| k | ((p as u64) << i))
    }
}

/// 1 where the intensity is strictly above `threshold`.
pub fn binarize_image(img: &Image, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().map(|&p| p > threshold).collect(),
    }
}

/// Foreground positions `(x, y)` in row-major order.
pub fn select_pois(img: &BinaryImage) -> Vec<(usize, usize)> {
    (0..img.height)
        .flat_map(|y| (0..img.width).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y))
        .collect()
}

/// Zero-padded patch of odd size `z` centred on `(x, y)`.
pub fn extract_patch(img: &BinaryImage, center: (usize, usize), z: usize) -> Result<Patch> {
    if z.is_multiple_of(2) {
        return Err(HdcError::InvalidConfig(format!(
            "patch size {z} must be odd"
        )));
    }
    let r = (z / 2) as isize;
    let (cx, cy) = (center.0 as isize, center.1 as isize);
    let mut pixels = Vec::with_capacity(z * z);
    for j in 0..z as isize {
        for i in 0..z as isize {
            pixels.push(img.get_padded(cx + i - r, cy + j - r));
        }
    }
    Patch::new(z, center, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_is_strict() {
        let img = Image::new(3, 1, vec![0, 1, 200]).unwrap();
        let b = binarize_image(&img, 0);
        assert_eq!(b.pixels, vec![false, true, true]);
        let b = binarize_image(&img, 200);
        assert_eq!(b.count_ones(), 0);
        let blank = Image::new(4, 4, vec![0; 16]).unwrap();
        assert_eq!(binarize_image(&blank, 0).count_ones(), 0);
    }

    #[test]
    fn poi_selection() {
        let blank = BinaryImage::new(6, 8, vec![false; 48]).unwrap();
        assert!(select_pois(&blank).is_empty());
        let mut px = vec![false; 48];
        px[5 * 6 + 3] = true;
        let single = BinaryImage::new(6, 8, px).unwrap();
        assert_eq!(select_pois(&single), vec![(3, 5)]);
        let checker = BinaryImage::from_rows(&["1010", "0101", "1010", "0101"]).unwrap();
        assert_eq!(select_pois(&checker).len(), 8);
    }

    #[test]
    fn patches_are_zero_padded() {
        let img = BinaryImage::from_rows(&["11", "11"]).unwrap();
        let p = extract_patch(&img, (0, 0), 3).unwrap();
        assert_eq!(
            p.pixels(),
            &[false, false, false, false, true, true, false, true, true]
        );
        assert!(extract_patch(&img, (0, 0), 2).is_err());
        let p1 = extract_patch(&img, (1, 1), 1).unwrap();
        assert_eq!(p1.pixels(), &[true]);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Image::new(0, 3, vec![]).is_err());
        assert!(Image::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn translation() {
        let img = BinaryImage::from_rows(&["100", "000"]).unwrap();
        let t = img.translated(1, 1);
        assert_eq!(select_pois(&t), vec![(1, 1)]);
        assert_eq!(img.translated(5, 0).count_ones(), 0);
    }
}
