//! Switching filter: pixels flagged by a detector are replaced by a robust
//! estimate computed from their 3x3 window, the rest pass through untouched.
//!
//! Within one pass every replacement reads the input of that pass, never an
//! already replaced neighbor, so the result does not depend on visiting order
//! or thread count.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detectors::{detect, DetectorConfig};
use crate::error::{Error, Result};
use crate::image::{BinaryMask, ColorImage, WINDOW_LEN, WINDOW_OFFSETS};
use crate::vector::{amf, vmf};

/// How a flagged pixel is replaced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Replacement {
    /// Vector median of the full window.
    #[default]
    Vmf,
    /// Mean of the window members the detector left unflagged.
    Amf,
}

impl FromStr for Replacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vmf" => Ok(Replacement::Vmf),
            "amf" => Ok(Replacement::Amf),
            other => Err(Error::config(
                "replacement",
                format!("expected vmf or amf, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Replacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Replacement::Vmf => "vmf",
            Replacement::Amf => "amf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchingConfig {
    pub detector: DetectorConfig,
    #[serde(default)]
    pub replacement: Replacement,
    #[serde(default = "one")]
    pub passes: u32,
}

fn one() -> u32 {
    1
}

impl SwitchingConfig {
    pub fn new(detector: DetectorConfig) -> Self {
        SwitchingConfig {
            detector,
            replacement: Replacement::Vmf,
            passes: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.passes == 0 {
            return Err(Error::config("passes", "must be at least 1"));
        }
        self.detector.validate()
    }
}

fn check_shape(img: &ColorImage, mask: &BinaryMask) -> Result<()> {
    if img.width() != mask.width() || img.height() != mask.height() {
        return Err(Error::Shape {
            left_h: img.height(),
            left_w: img.width(),
            right_h: mask.height(),
            right_w: mask.width(),
        });
    }
    Ok(())
}

/// Replaces the flagged pixels of `img` by the vector median of their window.
pub fn vmf_at(img: &ColorImage, mask: &BinaryMask) -> ColorImage {
    replace_flagged(img, mask, Replacement::Vmf).expect("mask matches image")
}

/// Applies one switching pass with a precomputed detection mask.
pub fn replace_flagged(
    img: &ColorImage,
    mask: &BinaryMask,
    replacement: Replacement,
) -> Result<ColorImage> {
    check_shape(img, mask)?;
    ColorImage::from_fn(img.width(), img.height(), |row, col| {
        if !mask.get(row, col) {
            return img.get(row, col);
        }
        let w = img.window_unchecked(row, col);
        match replacement {
            Replacement::Vmf => vmf(&w),
            Replacement::Amf => {
                let (h, wd) = (img.height() as isize, img.width() as isize);
                let clean: [bool; WINDOW_LEN] = std::array::from_fn(|i| {
                    let (dr, dc) = WINDOW_OFFSETS[i];
                    let r = (row as isize + dr).clamp(0, h - 1) as usize;
                    let c = (col as isize + dc).clamp(0, wd - 1) as usize;
                    !mask.get(r, c)
                });
                amf(&w, &clean)
            }
        }
    })
}

/// Detects and replaces, `cfg.passes` times. Returns the restored image and
/// the union of all detection masks.
pub fn denoise(img: &ColorImage, cfg: &SwitchingConfig) -> Result<(ColorImage, BinaryMask)> {
    cfg.validate()?;
    let mut current = img.clone();
    let mut union = BinaryMask::zeros(img.width(), img.height());
    for _ in 0..cfg.passes {
        let mask = detect(&current, &cfg.detector)?.mask;
        current = replace_flagged(&current, &mask, cfg.replacement)?;
        union = union.union(&mask);
    }
    Ok((current, union))
}

/// Non-switching baseline: the vector median at every pixel.
pub fn plain_vmf_image(img: &ColorImage) -> ColorImage {
    ColorImage::from_fn(img.width(), img.height(), |row, col| {
        vmf(&img.window_unchecked(row, col))
    })
    .expect("shape preserved")
}
