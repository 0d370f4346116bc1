//! Restoration and detection metrics, ROC sweeps and timing.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::detectors::{detect, dm1_statistic, dm2_statistic, DetectorConfig};
use crate::error::{Error, Result};
use crate::image::{BinaryMask, ColorImage};
use crate::noise::{corrupt, NoiseSpec};
use crate::pipeline::{denoise, SwitchingConfig};
use crate::vector::RankWeighting;

/// Pixel-level 2x2 tally of a detection mask against ground truth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Fraction of clean pixels flagged.
    pub fn fp_rate(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    /// Fraction of corrupted pixels missed.
    pub fn fn_rate(&self) -> f64 {
        ratio(self.fn_, self.fn_ + self.tp)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn shape_error(lh: usize, lw: usize, rh: usize, rw: usize) -> Error {
    Error::Shape {
        left_h: lh,
        left_w: lw,
        right_h: rh,
        right_w: rw,
    }
}

pub fn confusion(truth: &BinaryMask, detected: &BinaryMask) -> Result<ConfusionCounts> {
    if !truth.same_shape(detected) {
        return Err(shape_error(
            truth.height(),
            truth.width(),
            detected.height(),
            detected.width(),
        ));
    }
    let mut c = ConfusionCounts::default();
    for (&t, &d) in truth.bits().iter().zip(detected.bits()) {
        match (t, d) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `(fp_rate, fn_rate)`; an empty denominator gives a rate of 0.
pub fn rates(c: &ConfusionCounts) -> (f64, f64) {
    (c.fp_rate(), c.fn_rate())
}

/// PSNR in dB for an 8-bit peak; `+inf` when `mse == 0`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (255.0 / mse.sqrt()).log10()
    }
}

/// Mean squared error over all `3N` channel values, and the matching PSNR.
pub fn mse_psnr(clean: &ColorImage, restored: &ColorImage) -> Result<(f64, f64)> {
    if clean.width() != restored.width() || clean.height() != restored.height() {
        return Err(shape_error(
            clean.height(),
            clean.width(),
            restored.height(),
            restored.width(),
        ));
    }
    let sse: u64 = clean
        .pixels()
        .iter()
        .zip(restored.pixels())
        .map(|(a, b)| {
            a.channels()
                .iter()
                .zip(b.channels())
                .map(|(&x, y)| {
                    let d = x as i64 - y as i64;
                    (d * d) as u64
                })
                .sum::<u64>()
        })
        .sum();
    let mse = sse as f64 / (3 * clean.len()) as f64;
    Ok((mse, psnr_from_mse(mse)))
}

fn ser_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

fn de_db<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Db {
        Num(f64),
        Text(String),
    }
    match Db::deserialize(d)? {
        Db::Num(v) => Ok(v),
        Db::Text(t) => t.parse().map_err(serde::de::Error::custom),
    }
}

/// Metrics of one restoration run. The similarity-index columns are reserved
/// for values computed by external tools and are left empty here.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub label: String,
    pub mse: f64,
    #[serde(serialize_with = "ser_db", deserialize_with = "de_db")]
    pub psnr: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub elapsed_seconds: f64,
    pub fsimc: Option<f64>,
    pub sr_sim: Option<f64>,
    pub ifs: Option<f64>,
}

impl QualityReport {
    /// Image metrics, plus detection rates when a truth/detected pair is given.
    pub fn evaluate(
        label: impl Into<String>,
        clean: &ColorImage,
        restored: &ColorImage,
        detection: Option<(&BinaryMask, &BinaryMask)>,
        elapsed_seconds: f64,
    ) -> Result<Self> {
        let (mse, psnr) = mse_psnr(clean, restored)?;
        let (fp_rate, fn_rate) = match detection {
            Some((truth, detected)) => rates(&confusion(truth, detected)?),
            None => (0.0, 0.0),
        };
        Ok(QualityReport {
            label: label.into(),
            mse,
            psnr,
            fp_rate,
            fn_rate,
            elapsed_seconds,
            fsimc: None,
            sr_sim: None,
            ifs: None,
        })
    }
}

/// Scalarization used to pick one operating point off an ROC sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionRule {
    /// `sqrt(fp² + fn²)`, distance to the ideal corner.
    #[default]
    Euclidean,
    /// `fp + fn`.
    Sum,
}

impl SelectionRule {
    pub fn score(self, fp_rate: f64, fn_rate: f64) -> f64 {
        match self {
            SelectionRule::Euclidean => fp_rate.hypot(fn_rate),
            SelectionRule::Sum => fp_rate + fn_rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub params: DetectorConfig,
    pub fp_rate: f64,
    pub fn_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocSweep {
    pub noise: NoiseSpec,
    pub rule: SelectionRule,
    pub points: Vec<RocPoint>,
    /// Index into `points` of the selected operating point.
    pub selected: usize,
}

impl RocSweep {
    pub fn best(&self) -> &RocPoint {
        &self.points[self.selected]
    }
}

/// Index of the lowest-scoring point, first on ties.
pub fn select_operating_point(points: &[RocPoint], rule: SelectionRule) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let s = rule.score(p.fp_rate, p.fn_rate);
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

type StatKey = (bool, RankWeighting);

/// Corrupts `clean` once and scores every configuration of `grid` against the
/// ground truth. Threshold detectors reuse one statistic per weighting.
pub fn roc_sweep(
    clean: &ColorImage,
    spec: &NoiseSpec,
    grid: &[DetectorConfig],
    rule: SelectionRule,
) -> Result<RocSweep> {
    if grid.is_empty() {
        return Err(Error::config("grid", "ROC grid is empty"));
    }
    grid.iter().try_for_each(DetectorConfig::validate)?;
    let noisy = corrupt(clean, spec)?;
    let truth = &noisy.pixel_mask;

    let mut stats: Vec<(StatKey, Vec<f64>)> = Vec::new();
    for cfg in grid {
        let key = match cfg {
            DetectorConfig::Dm1 { weighting, .. } => (true, *weighting),
            DetectorConfig::Dm2 { weighting, .. } => (false, *weighting),
            _ => continue,
        };
        if !stats.iter().any(|(k, _)| *k == key) {
            let stat = if key.0 {
                dm1_statistic(&noisy.noisy, &key.1)
            } else {
                dm2_statistic(&noisy.noisy, &key.1)
            };
            stats.push((key, stat));
        }
    }

    let points = grid
        .par_iter()
        .map(|cfg| {
            let mask = match cfg {
                DetectorConfig::Dm1 { alpha, weighting }
                | DetectorConfig::Dm2 { alpha, weighting } => {
                    let key = (matches!(cfg, DetectorConfig::Dm1 { .. }), *weighting);
                    let stat = &stats.iter().find(|(k, _)| *k == key).expect("cached").1;
                    let bits = stat.iter().map(|&s| s > *alpha).collect();
                    BinaryMask::new(clean.width(), clean.height(), bits)?
                }
                _ => detect(&noisy.noisy, cfg)?.mask,
            };
            let (fp_rate, fn_rate) = rates(&confusion(truth, &mask)?);
            Ok(RocPoint {
                params: cfg.clone(),
                fp_rate,
                fn_rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let selected = select_operating_point(&points, rule).expect("grid is non-empty");
    Ok(RocSweep {
        noise: *spec,
        rule,
        points,
        selected,
    })
}

/// Output of [`timed_denoise`].
#[derive(Clone, Debug)]
pub struct TimedRun {
    pub restored: ColorImage,
    pub mask: BinaryMask,
    /// Median wall-clock seconds over the timed repetitions.
    pub elapsed_seconds: f64,
    pub samples: Vec<f64>,
}

pub const DEFAULT_REPEATS: usize = 20;

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times `denoise`: one untimed warm-up run, then `repeats` timed runs.
pub fn timed_denoise(img: &ColorImage, cfg: &SwitchingConfig, repeats: usize) -> Result<TimedRun> {
    if repeats == 0 {
        return Err(Error::config("repeats", "must be at least 1"));
    }
    let (mut restored, mut mask) = denoise(img, cfg)?;
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let out = denoise(img, cfg)?;
        samples.push(start.elapsed().as_secs_f64());
        (restored, mask) = out;
    }
    Ok(TimedRun {
        restored,
        mask,
        elapsed_seconds: median(&samples),
        samples,
    })
}

/// One row of a timing table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub detector: String,
    pub params: String,
    pub median_seconds: f64,
    pub repeats: usize,
}

#[derive(Serialize)]
struct RocRow {
    index: usize,
    detector: String,
    params: String,
    fp_rate: f64,
    fn_rate: f64,
    score: f64,
    selected: bool,
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Encode {
        path: "<csv>".into(),
        reason: e.to_string(),
    }
}

/// CSV header: `index,detector,params,fp_rate,fn_rate,score,selected`.
pub fn write_roc_csv<W: Write>(out: W, sweep: &RocSweep) -> Result<()> {
    let mut w = csv_writer(out);
    for (i, p) in sweep.points.iter().enumerate() {
        w.serialize(RocRow {
            index: i,
            detector: p.params.kind().to_string(),
            params: p.params.params_string(),
            fp_rate: p.fp_rate,
            fn_rate: p.fn_rate,
            score: sweep.rule.score(p.fp_rate, p.fn_rate),
            selected: i == sweep.selected,
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })
}

/// CSV header: `label,mse,psnr,fp_rate,fn_rate,elapsed_seconds,fsimc,sr_sim,ifs`.
pub fn write_csv_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Encode {
        path: "<json>".into(),
        reason: e.to_string(),
    })?;
    writeln!(out).map_err(|e| Error::Io {
        path: "<json>".into(),
        source: e,
    })
}
