//! Binary and flat grayscale morphology.
//!
//! Binary masks are treated as sets of points in the plane with everything
//! outside the raster equal to 0. [`dilate`] and [`erode`] return their result
//! restricted to the raster. [`close`] evaluates the dilation on a canvas
//! enlarged by the element radius before eroding, so it is the exact planar
//! closing restricted to the raster (extensive and idempotent up to the
//! border).
//!
//! Grayscale dilation and erosion are windowed max and min with
//! replicate padding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{par_map_grid, BinaryMask, GrayImage};

/// A flat structuring element with odd dimensions and its origin at the center.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StructuringElement {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl StructuringElement {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::config(
                "selem",
                format!("dimensions must be odd, got {width}x{height}"),
            ));
        }
        if bits.len() != width * height {
            return Err(Error::config(
                "selem",
                "bit count does not match dimensions",
            ));
        }
        if !bits[(height / 2) * width + width / 2] {
            return Err(Error::config("selem", "origin cell must be set"));
        }
        Ok(StructuringElement {
            width,
            height,
            bits,
        })
    }

    /// The 3x3 all-ones square.
    pub fn square3() -> Self {
        Self::square(3)
    }

    pub fn square(side: usize) -> Self {
        assert!(side % 2 == 1, "side must be odd");
        StructuringElement {
            width: side,
            height: side,
            bits: vec![true; side * side],
        }
    }

    /// The 1x1 identity element.
    pub fn point() -> Self {
        Self::square(1)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    /// Point reflection about the origin.
    pub fn reflect(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        StructuringElement {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    /// Offsets `(d_row, d_col)` of the set cells relative to the origin.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let (oy, ox) = ((self.height / 2) as isize, (self.width / 2) as isize);
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .filter(|&(r, c)| self.get(r, c))
            .map(|(r, c)| (r as isize - oy, c as isize - ox))
            .collect()
    }

    fn radius(&self) -> (usize, usize) {
        (self.height / 2, self.width / 2)
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square3()
    }
}

/// Parses rows of `0`/`1` separated by `/`, e.g. `010/111/010`.
impl FromStr for StructuringElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s.trim().split('/').collect();
        let width = rows[0].len();
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::config(
                "selem",
                format!("ragged or empty rows in `{s}`"),
            ));
        }
        let mut bits = Vec::with_capacity(width * rows.len());
        for ch in rows.iter().flat_map(|r| r.chars()) {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::config(
                        "selem",
                        format!("unexpected character `{other}`"),
                    ))
                }
            }
        }
        Self::new(width, rows.len(), bits)
    }
}

impl fmt::Display for StructuringElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            if r > 0 {
                f.write_str("/")?;
            }
            for c in 0..self.width {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

impl TryFrom<String> for StructuringElement {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StructuringElement> for String {
    fn from(b: StructuringElement) -> String {
        b.to_string()
    }
}

/// Dilation on a canvas grown by `pad = (rows, cols)` cells on every side.
/// Canvas cell `(r, c)` corresponds to mask cell `(r - pad.0, c - pad.1)`.
fn dilate_padded(a: &BinaryMask, b: &StructuringElement, pad: (usize, usize)) -> BinaryMask {
    let offsets = b.offsets();
    let (h, w) = (a.height() + 2 * pad.0, a.width() + 2 * pad.1);
    BinaryMask::from_fn(w, h, |row, col| {
        let (r, c) = (row as isize - pad.0 as isize, col as isize - pad.1 as isize);
        offsets
            .iter()
            .any(|&(dr, dc)| a.get_or_zero(r - dr, c - dc))
    })
}

/// Erosion of `a`, evaluated only on the window `origin .. origin + size`.
fn erode_region(
    a: &BinaryMask,
    b: &StructuringElement,
    origin: (usize, usize),
    size: (usize, usize),
) -> BinaryMask {
    let offsets = b.offsets();
    BinaryMask::from_fn(size.1, size.0, |row, col| {
        let (r, c) = ((row + origin.0) as isize, (col + origin.1) as isize);
        offsets
            .iter()
            .all(|&(dr, dc)| a.get_or_zero(r + dr, c + dc))
    })
}

/// Minkowski dilation: `s` is set iff the reflected element placed at `s`
/// hits a set cell of `a`.
pub fn dilate(a: &BinaryMask, b: &StructuringElement) -> BinaryMask {
    dilate_padded(a, b, (0, 0))
}

/// Erosion: `s` is set iff the element placed at `s` lies inside `a`.
/// Cells outside the raster count as 0.
pub fn erode(a: &BinaryMask, b: &StructuringElement) -> BinaryMask {
    erode_region(a, b, (0, 0), (a.height(), a.width()))
}

/// Dilation followed by erosion.
pub fn close(a: &BinaryMask, b: &StructuringElement) -> BinaryMask {
    let pad = b.radius();
    let grown = dilate_padded(a, b, pad);
    erode_region(&grown, b, pad, (a.height(), a.width()))
}

/// Erosion followed by dilation.
pub fn open(a: &BinaryMask, b: &StructuringElement) -> BinaryMask {
    dilate(&erode(a, b), b)
}

/// Closing minus the original: the holes and gaps the closing fills in.
pub fn bottom_hat(a: &BinaryMask, b: &StructuringElement) -> BinaryMask {
    close(a, b).difference(a)
}

/// Clears set pixels whose four 4-connected neighbors are all set, leaving the
/// boundary of each region. Pixels on the raster edge are never interior.
pub fn remove_interior(a: &BinaryMask) -> BinaryMask {
    BinaryMask::from_fn(a.width(), a.height(), |row, col| {
        if !a.get(row, col) {
            return false;
        }
        let (r, c) = (row as isize, col as isize);
        let interior = a.get_or_zero(r - 1, c)
            && a.get_or_zero(r + 1, c)
            && a.get_or_zero(r, c - 1)
            && a.get_or_zero(r, c + 1);
        !interior
    })
}

fn gray_rank(
    img: &GrayImage,
    offsets: &[(isize, isize)],
    pick: impl Fn(u8, u8) -> u8 + Sync,
    init: u8,
) -> GrayImage {
    let (h, w) = (img.height() as isize, img.width() as isize);
    let values = par_map_grid(img.width(), img.height(), |row, col| {
        offsets.iter().fold(init, |acc, &(dr, dc)| {
            let r = (row as isize + dr).clamp(0, h - 1) as usize;
            let c = (col as isize + dc).clamp(0, w - 1) as usize;
            pick(acc, img.get(r, c))
        })
    });
    GrayImage::new(img.width(), img.height(), values).expect("shape preserved")
}

/// Flat grayscale dilation (windowed max over the reflected element).
pub fn gray_dilate(img: &GrayImage, b: &StructuringElement) -> GrayImage {
    let offsets: Vec<_> = b.offsets().into_iter().map(|(r, c)| (-r, -c)).collect();
    gray_rank(img, &offsets, u8::max, 0)
}

/// Flat grayscale erosion (windowed min over the element).
pub fn gray_erode(img: &GrayImage, b: &StructuringElement) -> GrayImage {
    gray_rank(img, &b.offsets(), u8::min, 255)
}

/// Grayscale closing minus the original, saturating at 0. Highlights dark
/// spots narrower than the element.
pub fn gray_bottom_hat(img: &GrayImage, b: &StructuringElement) -> GrayImage {
    let closed = gray_erode(&gray_dilate(img, b), b);
    let values = closed
        .values()
        .iter()
        .zip(img.values())
        .map(|(&c, &v)| c.saturating_sub(v))
        .collect();
    GrayImage::new(img.width(), img.height(), values).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '1'))
            .collect();
        BinaryMask::new(w, h, bits).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let b: StructuringElement = "010/111/010".parse().unwrap();
        assert_eq!(b.to_string(), "010/111/010");
        assert_eq!(b.offsets().len(), 5);
        assert!("11/11".parse::<StructuringElement>().is_err());
        assert!("111/101/111".parse::<StructuringElement>().is_err());
        assert!("111/11".parse::<StructuringElement>().is_err());
        assert!("1x1/111/111".parse::<StructuringElement>().is_err());
    }

    #[test]
    fn reflect_is_point_reflection() {
        let b: StructuringElement = "110/010/000".parse().unwrap();
        assert_eq!(b.reflect().to_string(), "000/010/011");
        assert_eq!(
            StructuringElement::square3().reflect(),
            StructuringElement::square3()
        );
    }

    #[test]
    fn dilate_point() {
        let a = mask(&["00000", "00000", "00100", "00000", "00000"]);
        let d = dilate(&a, &StructuringElement::square3());
        assert_eq!(d, mask(&["00000", "01110", "01110", "01110", "00000"]));
        assert!(dilate(&BinaryMask::zeros(5, 5), &StructuringElement::square3()).is_empty_set());
    }

    #[test]
    fn identity_element() {
        let a = mask(&["1011", "0110", "1001"]);
        let p = StructuringElement::point();
        assert_eq!(dilate(&a, &p), a);
        assert_eq!(erode(&a, &p), a);
    }

    #[test]
    fn erode_shrinks_at_border() {
        let e = erode(&BinaryMask::ones(5, 4), &StructuringElement::square3());
        assert_eq!(e, mask(&["00000", "01110", "01110", "00000"]));
        let single = mask(&["000", "010", "000"]);
        assert!(erode(&single, &StructuringElement::square3()).is_empty_set());
    }

    #[test]
    fn close_fills_gap() {
        let a = mask(&["00000", "00000", "01010", "00000", "00000"]);
        let c = close(&a, &StructuringElement::square3());
        assert_eq!(c, mask(&["00000", "00000", "01110", "00000", "00000"]));
        let bh = bottom_hat(&a, &StructuringElement::square3());
        assert_eq!(bh, mask(&["00000", "00000", "00100", "00000", "00000"]));
    }

    #[test]
    fn open_removes_speckle() {
        let a = mask(&["00000", "00000", "00100", "00000", "00000"]);
        assert!(open(&a, &StructuringElement::square3()).is_empty_set());
        let rect = mask(&[
            "0000000", "0111110", "0111110", "0111110", "0111110", "0000000",
        ]);
        assert_eq!(open(&rect, &StructuringElement::square3()), rect);
    }

    #[test]
    fn bottom_hat_of_full_is_empty() {
        let full = BinaryMask::ones(6, 6);
        assert_eq!(close(&full, &StructuringElement::square3()), full);
        assert!(bottom_hat(&full, &StructuringElement::square3()).is_empty_set());
        assert!(
            bottom_hat(&BinaryMask::zeros(6, 6), &StructuringElement::square3()).is_empty_set()
        );
    }

    #[test]
    fn remove_keeps_boundaries() {
        let block = mask(&["00000", "01110", "01110", "01110", "00000"]);
        assert_eq!(
            remove_interior(&block),
            mask(&["00000", "01110", "01010", "01110", "00000"])
        );
        let full = BinaryMask::ones(5, 5);
        assert_eq!(
            remove_interior(&full),
            mask(&["11111", "10001", "10001", "10001", "11111"])
        );
        let sparse = mask(&["101", "010", "101"]);
        assert_eq!(remove_interior(&sparse), sparse);
    }

    #[test]
    fn gray_bottom_hat_cases() {
        let b = StructuringElement::square3();
        let flat = GrayImage::filled(5, 5, 90).unwrap();
        assert!(gray_bottom_hat(&flat, &b).values().iter().all(|&v| v == 0));

        let mut pit = GrayImage::filled(5, 5, 200).unwrap();
        pit.set(2, 2, 0);
        let bh = gray_bottom_hat(&pit, &b);
        for r in 0..5 {
            for c in 0..5 {
                let want = if (r, c) == (2, 2) { 200 } else { 0 };
                assert_eq!(bh.get(r, c), want);
            }
        }

        let mut spike = GrayImage::filled(7, 7, 60).unwrap();
        spike.set(3, 3, 255);
        assert!(gray_bottom_hat(&spike, &b).values().iter().all(|&v| v == 0));
    }
}
