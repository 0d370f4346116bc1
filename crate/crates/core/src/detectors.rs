//! Impulse detectors. Each maps a color image to a mask of pixels declared
//! corrupted, plus the per-pixel statistic the decision was taken on.
//!
//! * `Dm1`: rank-weighted score of the center minus the window minimum, above `alpha`.
//! * `Dm2`: the window minimum rank-weighted score itself, above `alpha`.
//! * `Dm3`: peer group of the center (neighbors closer than `d`) of size at most `k`.
//! * `Dm4`: `Dm3` repeated over a schedule of `(d, k)` steps, filtering flagged
//!   pixels between steps.
//! * `Dm5`: union of five binary morphology masks built from shifted and
//!   thresholded channels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{
    channel_shift, channel_shift_color, par_map_grid, rgb_to_gray, subtract_from,
    subtract_from_color, threshold_bw, BinaryMask, ColorImage, GrayImage, Window,
};
use crate::morphology::{bottom_hat, gray_bottom_hat, remove_interior, StructuringElement};
use crate::noise::{ImpulseValues, NoiseFamily};
use crate::pipeline::vmf_at;
use crate::vector::{squared_distance, RankWeighting};

/// Squared L2 distance between black and white, `3 * 255²`.
const MAX_SQUARED_DISTANCE: f64 = 3.0 * 255.0 * 255.0;

/// One `(d, k)` step of the peer group detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeerStep {
    pub d: f64,
    pub k: u8,
}

impl PeerStep {
    pub const fn new(d: f64, k: u8) -> Self {
        PeerStep { d, k }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.d) {
            return Err(Error::config(
                "d",
                format!("must lie in [0, 1], got {}", self.d),
            ));
        }
        if self.k > 8 {
            return Err(Error::config(
                "k",
                format!("must lie in [0, 8], got {}", self.k),
            ));
        }
        Ok(())
    }
}

/// How `set2(A, pset)` combines the image with `pset`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Set2Reading {
    /// `A - pset`, like `set1`.
    Shift,
    /// `pset - A`: dark impulses become bright ones.
    #[default]
    Complement,
}

impl Set2Reading {
    fn apply(self, x: &GrayImage, pset: u8) -> GrayImage {
        match self {
            Set2Reading::Shift => channel_shift(x, -(pset as i32)),
            Set2Reading::Complement => subtract_from(x, pset),
        }
    }

    fn apply_color(self, img: &ColorImage, pset: u8) -> ColorImage {
        match self {
            Set2Reading::Shift => channel_shift_color(img, -(pset as i32)),
            Set2Reading::Complement => subtract_from_color(img, pset),
        }
    }
}

impl FromStr for Set2Reading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shift" => Ok(Set2Reading::Shift),
            "complement" => Ok(Set2Reading::Complement),
            other => Err(Error::config(
                "set2",
                format!("expected shift or complement, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Set2Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Set2Reading::Shift => "shift",
            Set2Reading::Complement => "complement",
        })
    }
}

/// Parameters of the morphological detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphParams {
    pub pset: u8,
    pub mset: u8,
    pub level: u8,
    pub selem: StructuringElement,
    #[serde(default)]
    pub set2: Set2Reading,
    /// Optional per-sub-mask replacement for `level`, indexed M1..M5.
    #[serde(default)]
    pub level_overrides: [Option<u8>; 5],
}

impl MorphParams {
    pub fn new(pset: u8, mset: u8, level: u8) -> Self {
        MorphParams {
            pset,
            mset,
            level,
            selem: StructuringElement::square3(),
            set2: Set2Reading::default(),
            level_overrides: [None; 5],
        }
    }

    /// Parameters selected by ROC sweeps on salt-and-pepper (variant 1) and
    /// random-valued (variants 2, 3) noise at p = 0.1; see the `tune_morph`
    /// and `tune_presets` examples. Variant 1 uses the defaults.
    pub fn preset(family: NoiseFamily, values: ImpulseValues) -> Self {
        let (pset, mset, level, set2) = match (family, values) {
            (_, ImpulseValues::Extremes) => return MorphParams::default(),
            (NoiseFamily::Ci, ImpulseValues::Uniform) => (160, 0, 32, Set2Reading::Shift),
            (NoiseFamily::Ci, ImpulseValues::Tails) => (128, 0, 64, Set2Reading::Shift),
            (NoiseFamily::Ct, ImpulseValues::Uniform) => (224, 32, 64, Set2Reading::Complement),
            (NoiseFamily::Ct, ImpulseValues::Tails) => (224, 0, 192, Set2Reading::Complement),
        };
        MorphParams {
            set2,
            ..MorphParams::new(pset, mset, level)
        }
    }

    /// Threshold used by sub-mask `index` (0-based).
    pub fn level_for(&self, index: usize) -> u8 {
        self.level_overrides[index].unwrap_or(self.level)
    }
}

impl Default for MorphParams {
    fn default() -> Self {
        MorphParams::new(DEFAULT_MORPH_PSET, DEFAULT_MORPH_MSET, DEFAULT_MORPH_LEVEL)
    }
}

/// Default `pset`, `mset` and `level` of the morphological detector, picked by
/// a grid search against salt-and-pepper noise at p = 0.1 to 0.3 (see
/// `examples/tune_morph.rs`).
pub const DEFAULT_MORPH_PSET: u8 = 255;
pub const DEFAULT_MORPH_MSET: u8 = 0;
pub const DEFAULT_MORPH_LEVEL: u8 = 250;

pub const DEFAULT_ALPHA_DM1: f64 = 18.0;
pub const DEFAULT_ALPHA_DM2: f64 = 60.0;
pub const DEFAULT_PEER_STEP: PeerStep = PeerStep::new(0.25, 2);

/// Shrinking-radius schedule for the iterative peer group detector. Only the
/// first step is canonical; the later ones are a tunable default.
pub fn default_schedule() -> Vec<PeerStep> {
    vec![
        PeerStep::new(0.25, 3),
        PeerStep::new(0.25, 2),
        PeerStep::new(0.15, 2),
    ]
}

/// Detector selection and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum DetectorConfig {
    Dm1 {
        alpha: f64,
        weighting: RankWeighting,
    },
    Dm2 {
        alpha: f64,
        weighting: RankWeighting,
    },
    Dm3(PeerStep),
    Dm4 {
        schedule: Vec<PeerStep>,
    },
    Dm5(MorphParams),
}

impl DetectorConfig {
    pub fn kind(&self) -> DetectorKind {
        match self {
            DetectorConfig::Dm1 { .. } => DetectorKind::Dm1,
            DetectorConfig::Dm2 { .. } => DetectorKind::Dm2,
            DetectorConfig::Dm3(_) => DetectorKind::Dm3,
            DetectorConfig::Dm4 { .. } => DetectorKind::Dm4,
            DetectorConfig::Dm5(_) => DetectorKind::Dm5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DetectorConfig::Dm1 { alpha, .. } | DetectorConfig::Dm2 { alpha, .. } => {
                if alpha.is_nan() || *alpha < 0.0 {
                    return Err(Error::config("alpha", format!("must be >= 0, got {alpha}")));
                }
                Ok(())
            }
            DetectorConfig::Dm3(step) => step.validate(),
            DetectorConfig::Dm4 { schedule } => {
                if schedule.is_empty() {
                    return Err(Error::config("schedule", "must contain at least one step"));
                }
                schedule.iter().try_for_each(PeerStep::validate)
            }
            DetectorConfig::Dm5(_) => Ok(()),
        }
    }

    /// Compact `key=value` rendering of the parameters, `;`-separated.
    pub fn params_string(&self) -> String {
        match self {
            DetectorConfig::Dm1 { alpha, weighting } | DetectorConfig::Dm2 { alpha, weighting } => {
                format!("alpha={alpha};weighting={weighting}")
            }
            DetectorConfig::Dm3(s) => format!("d={};k={}", s.d, s.k),
            DetectorConfig::Dm4 { schedule } => {
                let steps: Vec<String> = schedule
                    .iter()
                    .map(|s| format!("{}:{}", s.d, s.k))
                    .collect();
                format!("schedule={}", steps.join(","))
            }
            DetectorConfig::Dm5(m) => format!(
                "pset={};mset={};level={};selem={};set2={}",
                m.pset, m.mset, m.level, m.selem, m.set2
            ),
        }
    }
}

impl fmt::Display for DetectorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind(), self.params_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Dm1,
    Dm2,
    Dm3,
    Dm4,
    Dm5,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::Dm1,
        DetectorKind::Dm2,
        DetectorKind::Dm3,
        DetectorKind::Dm4,
        DetectorKind::Dm5,
    ];

    pub fn default_config(self) -> DetectorConfig {
        match self {
            DetectorKind::Dm1 => DetectorConfig::Dm1 {
                alpha: DEFAULT_ALPHA_DM1,
                weighting: RankWeighting::reciprocal(),
            },
            DetectorKind::Dm2 => DetectorConfig::Dm2 {
                alpha: DEFAULT_ALPHA_DM2,
                weighting: RankWeighting::reciprocal(),
            },
            DetectorKind::Dm3 => DetectorConfig::Dm3(DEFAULT_PEER_STEP),
            DetectorKind::Dm4 => DetectorConfig::Dm4 {
                schedule: default_schedule(),
            },
            DetectorKind::Dm5 => DetectorConfig::Dm5(MorphParams::default()),
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = DetectorKind::ALL.iter().position(|k| k == self).unwrap() + 1;
        write!(f, "dm{n}")
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dm1" => Ok(DetectorKind::Dm1),
            "dm2" => Ok(DetectorKind::Dm2),
            "dm3" => Ok(DetectorKind::Dm3),
            "dm4" => Ok(DetectorKind::Dm4),
            "dm5" => Ok(DetectorKind::Dm5),
            other => Err(Error::config(
                "detector",
                format!("unknown detector `{other}`"),
            )),
        }
    }
}

/// Detector output.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionOutcome {
    pub mask: BinaryMask,
    /// Row-major per-pixel statistic the decision was taken on.
    pub per_pixel_stat: Option<Vec<f64>>,
}

impl DetectionOutcome {
    fn from_stat(img: &ColorImage, stat: Vec<f64>, flag: impl Fn(f64) -> bool) -> Self {
        let bits = stat.iter().map(|&s| flag(s)).collect();
        DetectionOutcome {
            mask: BinaryMask::new(img.width(), img.height(), bits).expect("shape preserved"),
            per_pixel_stat: Some(stat),
        }
    }
}

/// Runs the configured detector.
pub fn detect(img: &ColorImage, cfg: &DetectorConfig) -> Result<DetectionOutcome> {
    cfg.validate()?;
    Ok(match cfg {
        DetectorConfig::Dm1 { alpha, weighting } => detect_dm1(img, *alpha, weighting),
        DetectorConfig::Dm2 { alpha, weighting } => detect_dm2(img, *alpha, weighting),
        DetectorConfig::Dm3(step) => detect_dm3(img, *step),
        DetectorConfig::Dm4 { schedule } => detect_dm4(img, schedule)?,
        DetectorConfig::Dm5(params) => detect_dm5(img, params),
    })
}

fn rank_scores_grid(img: &ColorImage, f: &RankWeighting, stat: fn(f64, f64) -> f64) -> Vec<f64> {
    par_map_grid(img.width(), img.height(), |row, col| {
        let w = img.window_unchecked(row, col);
        let scores = crate::vector::rank_weighted_scores(&w, f);
        stat(scores.center(), scores.min())
    })
}

/// Center rank-weighted score minus the window minimum (`Δ₁ - Δ₍₁₎`), per pixel.
pub fn dm1_statistic(img: &ColorImage, f: &RankWeighting) -> Vec<f64> {
    rank_scores_grid(img, f, |center, min| center - min)
}

/// Window minimum rank-weighted score (`Δ₍₁₎`), per pixel.
pub fn dm2_statistic(img: &ColorImage, f: &RankWeighting) -> Vec<f64> {
    rank_scores_grid(img, f, |_, min| min)
}

pub fn detect_dm1(img: &ColorImage, alpha: f64, f: &RankWeighting) -> DetectionOutcome {
    DetectionOutcome::from_stat(img, dm1_statistic(img, f), |s| s > alpha)
}

pub fn detect_dm2(img: &ColorImage, alpha: f64, f: &RankWeighting) -> DetectionOutcome {
    DetectionOutcome::from_stat(img, dm2_statistic(img, f), |s| s > alpha)
}

/// Number of window members other than `center_index` whose distance to it,
/// normalized so that black-to-white is 1, is strictly below `d`.
pub fn peer_group_size(w: &Window, center_index: usize, d: f64) -> usize {
    let radius_sq = d * d * MAX_SQUARED_DISTANCE;
    let center = w.values[center_index];
    w.values
        .iter()
        .enumerate()
        .filter(|&(j, &p)| j != center_index && (squared_distance(p, center) as f64) < radius_sq)
        .count()
}

pub fn detect_dm3(img: &ColorImage, step: PeerStep) -> DetectionOutcome {
    let stat = par_map_grid(img.width(), img.height(), |row, col| {
        peer_group_size(&img.window_unchecked(row, col), 0, step.d) as f64
    });
    let k = step.k as f64;
    DetectionOutcome::from_stat(img, stat, |m| m <= k)
}

/// Iterated peer group detection. Step 0 runs on the input; before each later
/// step the pixels flagged by the previous step are replaced by their vector
/// median. The result is the union of all steps, and the statistic is the
/// 1-based step that first flagged a pixel (0 if none did).
pub fn detect_dm4(img: &ColorImage, schedule: &[PeerStep]) -> Result<DetectionOutcome> {
    let (first, rest) = schedule
        .split_first()
        .ok_or_else(|| Error::config("schedule", "must contain at least one step"))?;
    let mut union = detect_dm3(img, *first).mask;
    let mut stat: Vec<f64> = union
        .bits()
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect();
    let mut current = img.clone();
    let mut last = union.clone();
    for (t, step) in rest.iter().enumerate() {
        current = vmf_at(&current, &last);
        let found = detect_dm3(&current, *step).mask;
        let fresh = found.difference(&union);
        for (s, &b) in stat.iter_mut().zip(fresh.bits()) {
            if b {
                *s = (t + 2) as f64;
            }
        }
        union = union.union(&found);
        last = fresh;
    }
    Ok(DetectionOutcome {
        mask: union,
        per_pixel_stat: Some(stat),
    })
}

fn union_all(masks: impl IntoIterator<Item = BinaryMask>) -> BinaryMask {
    masks
        .into_iter()
        .reduce(|a, b| a.union(&b))
        .expect("at least one mask")
}

fn channels(img: &ColorImage) -> [GrayImage; 3] {
    [img.channel(0), img.channel(1), img.channel(2)]
}

/// The five sub-masks of the morphological detector, M1..M5.
pub fn dm5_sub_masks(img: &ColorImage, p: &MorphParams) -> [BinaryMask; 5] {
    let planes = channels(img);
    let mset = p.mset as i32;
    let b = &p.selem;
    let set2: Vec<GrayImage> = planes.iter().map(|x| p.set2.apply(x, p.pset)).collect();

    let l1 = p.level_for(0);
    let m1 = union_all(
        planes
            .iter()
            .map(|x| channel_shift(x, -mset))
            .chain(set2.iter().cloned())
            .map(|y| threshold_bw(&gray_bottom_hat(&y, b), l1)),
    );

    let l2 = p.level_for(1);
    let m2 = remove_interior(&union_all(set2.iter().map(|y| threshold_bw(y, l2))));

    let l3 = p.level_for(2);
    let m3 = remove_interior(&union_all(
        planes
            .iter()
            .map(|x| threshold_bw(&channel_shift(x, mset), l3)),
    ));

    let m4 = bottom_hat(&threshold_bw(&rgb_to_gray(img), p.level_for(3)), b);

    let shifted = rgb_to_gray(&p.set2.apply_color(img, p.pset));
    let m5 = bottom_hat(&threshold_bw(&shifted, p.level_for(4)), b);

    [m1, m2, m3, m4, m5]
}

pub fn detect_dm5(img: &ColorImage, p: &MorphParams) -> DetectionOutcome {
    let subs = dm5_sub_masks(img, p);
    let votes: Vec<f64> = (0..img.len())
        .map(|i| subs.iter().filter(|m| m.bits()[i]).count() as f64)
        .collect();
    DetectionOutcome::from_stat(img, votes, |v| v > 0.0)
}
