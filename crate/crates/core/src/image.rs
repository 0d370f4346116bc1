//! Raster types shared by every stage: color and gray images, binary masks,
//! and the 3x3 filtering window.
//!
//! All rasters are row-major with the origin at the top-left corner, indexed
//! `(row, col)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One RGB pixel, 8 bits per channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Pixel {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Pixel { r, g, b }
    }

    pub const fn gray(v: u8) -> Self {
        Pixel { r: v, g: v, b: v }
    }

    #[inline]
    pub const fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    #[inline]
    pub const fn from_channels(c: [u8; 3]) -> Self {
        Pixel {
            r: c[0],
            g: c[1],
            b: c[2],
        }
    }
}

impl From<[u8; 3]> for Pixel {
    fn from(c: [u8; 3]) -> Self {
        Pixel::from_channels(c)
    }
}

/// Evaluates `f` at every coordinate of a `height x width` grid, one rayon
/// task per row. The result is in row-major order regardless of scheduling.
pub(crate) fn par_map_grid<T, F>(width: usize, height: usize, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(usize, usize) -> T + Sync,
{
    let mut out = vec![T::default(); width * height];
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, chunk)| {
            for (col, slot) in chunk.iter_mut().enumerate() {
                *slot = f(row, col);
            }
        });
    out
}

/// An RGB image of at least 3x3 pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<Pixel>,
}

impl ColorImage {
    /// Smallest accepted side length; a full 3x3 window must fit.
    pub const MIN_SIDE: usize = 3;

    pub fn new(width: usize, height: usize, pixels: Vec<Pixel>) -> Result<Self> {
        if width < Self::MIN_SIDE || height < Self::MIN_SIDE {
            return Err(Error::InvalidImage(format!(
                "color images must be at least 3x3, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(ColorImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: Pixel) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` at every coordinate.
    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> Pixel + Sync,
    ) -> Result<Self> {
        Self::new(width, height, par_map_grid(width, height, f))
    }

    /// Interleaved `r, g, b` bytes, row-major.
    pub fn from_rgb_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::InvalidImage(format!(
                "expected {} bytes for {width}x{height} RGB, got {}",
                width * height * 3,
                bytes.len()
            )));
        }
        let pixels = bytes
            .chunks_exact(3)
            .map(|c| Pixel::new(c[0], c[1], c[2]))
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.channels()).collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Pixel {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Pixel) {
        self.pixels[row * self.width + col] = value;
    }

    /// Reads a pixel with replicate (clamp-to-edge) padding.
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> Pixel {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.get(r, c)
    }

    /// One color plane (0 = red, 1 = green, 2 = blue) as a gray image.
    pub fn channel(&self, index: usize) -> GrayImage {
        assert!(index < 3, "channel index {index} out of range");
        GrayImage {
            width: self.width,
            height: self.height,
            values: self.pixels.iter().map(|p| p.channels()[index]).collect(),
        }
    }

    /// The 3x3 window around `(row, col)`, center first.
    pub fn window(&self, row: usize, col: usize) -> Result<Window> {
        if row >= self.height || col >= self.width {
            return Err(Error::Coordinate {
                row,
                col,
                height: self.height,
                width: self.width,
            });
        }
        Ok(self.window_unchecked(row, col))
    }

    #[inline]
    pub(crate) fn window_unchecked(&self, row: usize, col: usize) -> Window {
        let mut values = [Pixel::default(); WINDOW_LEN];
        let (r, c) = (row as isize, col as isize);
        for (slot, (dr, dc)) in values.iter_mut().zip(WINDOW_OFFSETS) {
            *slot = self.get_clamped(r + dr, c + dc);
        }
        Window {
            center: (row, col),
            values,
        }
    }
}

/// Number of pixels in a filtering window.
pub const WINDOW_LEN: usize = 9;

/// Window slot offsets `(d_row, d_col)`: the center, then the 8-neighborhood
/// in row-major scan order.
pub const WINDOW_OFFSETS: [(isize, isize); WINDOW_LEN] = [
    (0, 0),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// A 3x3 neighborhood with its center stored at index 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub center: (usize, usize),
    pub values: [Pixel; WINDOW_LEN],
}

impl Window {
    /// A window not tied to any image, mostly for tests and direct filtering.
    pub fn from_values(values: [Pixel; WINDOW_LEN]) -> Self {
        Window {
            center: (0, 0),
            values,
        }
    }

    #[inline]
    pub fn center_pixel(&self) -> Pixel {
        self.values[0]
    }
}

/// Free-function form of [`ColorImage::window`].
pub fn extract_window(img: &ColorImage, row: usize, col: usize) -> Result<Window> {
    img.window(row, col)
}

/// A single-channel 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "gray image {width}x{height} with {} values",
                values.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.values[row * self.width + col] = v;
    }

    fn map(&self, f: impl Fn(u8) -> u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// A boolean raster; `true` marks a member of the set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "mask {width}x{height} with {} bits",
                bits.len()
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool + Sync) -> Self {
        BinaryMask {
            width,
            height,
            bits: par_map_grid(width, height, f),
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    /// Out-of-bounds reads return `false`.
    #[inline]
    pub fn get_or_zero(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.get(row as usize, col as usize)
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        self.bits[row * self.width + col] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty_set(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert!(
            self.same_shape(other),
            "mask shapes differ: {}x{} vs {}x{}",
            self.height,
            self.width,
            other.height,
            other.width
        );
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a & b)
    }

    /// `self ∩ otherᶜ`.
    pub fn difference(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    /// Fraction of set bits.
    pub fn density(&self) -> f64 {
        self.count_ones() as f64 / self.bits.len() as f64
    }
}

/// BT.601 luma, rounded to the nearest integer.
pub fn rgb_to_gray(img: &ColorImage) -> GrayImage {
    let values = img
        .pixels()
        .iter()
        .map(|p| {
            let y = 0.299 * p.r as f64 + 0.587 * p.g as f64 + 0.114 * p.b as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage {
        width: img.width(),
        height: img.height(),
        values,
    }
}

/// Binarizes with a strict `value > level` test.
pub fn threshold_bw(img: &GrayImage, level: u8) -> BinaryMask {
    BinaryMask {
        width: img.width,
        height: img.height,
        bits: img.values.iter().map(|&v| v > level).collect(),
    }
}

#[inline]
pub(crate) fn saturating_shift(v: u8, amount: i32) -> u8 {
    (v as i32 + amount).clamp(0, 255) as u8
}

/// Adds `amount` to every value, saturating to `[0, 255]`.
///
/// Subtracting a constant (`amount < 0`) is the `set1`/`set2` primitive of the
/// morphological detector, adding one is `set3`.
pub fn channel_shift(img: &GrayImage, amount: i32) -> GrayImage {
    img.map(|v| saturating_shift(v, amount))
}

/// [`channel_shift`] applied to all three channels of a color image.
pub fn channel_shift_color(img: &ColorImage, amount: i32) -> ColorImage {
    let pixels = img
        .pixels()
        .iter()
        .map(|p| Pixel::from_channels(p.channels().map(|c| saturating_shift(c, amount))))
        .collect();
    ColorImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Replaces every value `v` by `from - v`, saturating at 0.
pub fn subtract_from(img: &GrayImage, from: u8) -> GrayImage {
    img.map(|v| from.saturating_sub(v))
}

/// [`subtract_from`] applied to all three channels of a color image.
pub fn subtract_from_color(img: &ColorImage, from: u8) -> ColorImage {
    let pixels = img
        .pixels()
        .iter()
        .map(|p| Pixel::from_channels(p.channels().map(|c| from.saturating_sub(c))))
        .collect();
    ColorImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}
