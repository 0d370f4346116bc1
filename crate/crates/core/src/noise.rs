//! Impulse noise models.
//!
//! Two corruption families are supported. `Ci` replaces each channel of each
//! pixel independently with probability `p`; `Ct` replaces all three channels
//! of a pixel at once with probability `p`. A replaced channel receives an
//! impulse drawn from one of three value distributions:
//!
//! 1. `0` or `255`, equiprobable;
//! 2. uniform on `[0, 255]`;
//! 3. uniform on the 112 values of `[0, 55] ∪ [200, 255]`.
//!
//! Randomness comes from a single ChaCha8 stream seeded with
//! [`NoiseSpec::seed`]. Pixels are visited row-major, channels in `r, g, b`
//! order, so a given spec always yields the same image on every platform.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, ColorImage, Pixel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    /// Channels corrupted independently.
    Ci,
    /// All channels corrupted together.
    Ct,
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseFamily::Ci => "CI",
            NoiseFamily::Ct => "CT",
        })
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ci" => Ok(NoiseFamily::Ci),
            "ct" => Ok(NoiseFamily::Ct),
            other => Err(Error::config("family", format!("unknown family `{other}`"))),
        }
    }
}

/// Distribution of the replacement value of a corrupted channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ImpulseValues {
    /// `0` or `255` (salt and pepper).
    Extremes = 1,
    /// Uniform on `[0, 255]`.
    Uniform = 2,
    /// Uniform on `[0, 55] ∪ [200, 255]`.
    Tails = 3,
}

impl ImpulseValues {
    pub fn index(self) -> u8 {
        self as u8
    }

    /// Draws one impulse value.
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> u8 {
        match self {
            ImpulseValues::Extremes => {
                if rng.random_bool(0.5) {
                    255
                } else {
                    0
                }
            }
            ImpulseValues::Uniform => rng.random(),
            ImpulseValues::Tails => {
                let k: u8 = rng.random_range(0..112);
                if k < 56 {
                    k
                } else {
                    k + 144
                }
            }
        }
    }
}

impl TryFrom<u8> for ImpulseValues {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(ImpulseValues::Extremes),
            2 => Ok(ImpulseValues::Uniform),
            3 => Ok(ImpulseValues::Tails),
            _ => Err(Error::config(
                "variant",
                format!("must be 1, 2 or 3, got {v}"),
            )),
        }
    }
}

impl From<ImpulseValues> for u8 {
    fn from(v: ImpulseValues) -> u8 {
        v.index()
    }
}

/// Parameters of one noise model instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub variant: ImpulseValues,
    pub p: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, variant: ImpulseValues, p: f64, seed: u64) -> Result<Self> {
        let spec = NoiseSpec {
            family,
            variant,
            p,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::config(
                "p",
                format!("probability must lie in (0, 1), got {}", self.p),
            ));
        }
        Ok(())
    }

    /// Short model name such as `CI1` or `CT3`.
    pub fn label(&self) -> String {
        format!("{}{}", self.family, self.variant.index())
    }

    /// The six models at one probability, in `CI1..CI3, CT1..CT3` order.
    pub fn all_models(p: f64, seed: u64) -> Vec<NoiseSpec> {
        let mut out = Vec::with_capacity(6);
        for family in [NoiseFamily::Ci, NoiseFamily::Ct] {
            for variant in [
                ImpulseValues::Extremes,
                ImpulseValues::Uniform,
                ImpulseValues::Tails,
            ] {
                out.push(NoiseSpec {
                    family,
                    variant,
                    p,
                    seed,
                });
            }
        }
        out
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "family={} variant={} p={} seed={}",
            self.family,
            self.variant.index(),
            self.p,
            self.seed
        )
    }
}

/// A corrupted image together with its ground truth.
#[derive(Clone, Debug)]
pub struct CorruptionResult {
    pub noisy: ColorImage,
    /// Pixels with at least one replaced channel.
    pub pixel_mask: BinaryMask,
    /// Replaced channels, in `r, g, b` order.
    pub channel_masks: [BinaryMask; 3],
}

/// Corrupts a copy of `img` according to `spec`.
pub fn corrupt(img: &ColorImage, spec: &NoiseSpec) -> Result<CorruptionResult> {
    spec.validate()?;
    let (w, h) = (img.width(), img.height());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pixels = Vec::with_capacity(img.len());
    let mut hits = [vec![false; w * h], vec![false; w * h], vec![false; w * h]];

    for (i, px) in img.pixels().iter().enumerate() {
        let mut ch = px.channels();
        match spec.family {
            NoiseFamily::Ci => {
                for (c, value) in ch.iter_mut().enumerate() {
                    if rng.random_bool(spec.p) {
                        *value = spec.variant.draw(&mut rng);
                        hits[c][i] = true;
                    }
                }
            }
            NoiseFamily::Ct => {
                if rng.random_bool(spec.p) {
                    for (c, value) in ch.iter_mut().enumerate() {
                        *value = spec.variant.draw(&mut rng);
                        hits[c][i] = true;
                    }
                }
            }
        }
        pixels.push(Pixel::from_channels(ch));
    }

    let pixel_bits = (0..w * h)
        .map(|i| hits[0][i] || hits[1][i] || hits[2][i])
        .collect();
    let [r, g, b] = hits;
    Ok(CorruptionResult {
        noisy: ColorImage::new(w, h, pixels)?,
        pixel_mask: BinaryMask::new(w, h, pixel_bits)?,
        channel_masks: [
            BinaryMask::new(w, h, r)?,
            BinaryMask::new(w, h, g)?,
            BinaryMask::new(w, h, b)?,
        ],
    })
}
