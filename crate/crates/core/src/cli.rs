//! Command-line front end.
//!
//! Exit codes: 0 success, 2 unreadable or undecodable input, 3 unwritable
//! output, 4 invalid parameters.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::detectors::{DetectorConfig, DetectorKind, MorphParams, PeerStep, Set2Reading};
use crate::error::Error;
use crate::eval::{
    confusion, rates, roc_sweep, timed_denoise, write_csv_rows, write_json, write_roc_csv,
    BenchRow, ConfusionCounts, QualityReport, SelectionRule, DEFAULT_REPEATS,
};
use crate::image::ColorImage;
use crate::io::{read_color, read_mask, write_color, write_mask};
use crate::morphology::StructuringElement;
use crate::noise::{corrupt, ImpulseValues, NoiseFamily, NoiseSpec};
use crate::pipeline::{Replacement, SwitchingConfig};
use crate::vector::RankWeighting;
use crate::BinaryMask;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_OUTPUT: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(e: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }

    fn output(e: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_OUTPUT,
            message: e.to_string(),
        }
    }

    fn config(flag: &str, reason: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: format!("invalid value for --{flag}: {reason}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { param, reason } => CliError::config(param, reason),
            Error::Decode { .. } | Error::Coordinate { .. } | Error::InvalidImage(_) => {
                CliError::input(e)
            }
            Error::Encode { .. } => CliError::output(e),
            Error::Io { .. } => CliError::output(e),
            Error::Shape { .. } => CliError {
                code: EXIT_CONFIG,
                message: e.to_string(),
            },
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "impulse-denoise",
    version,
    about = "Impulse noise corruption, detection and switching-filter removal for color images"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for row-parallel filtering (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Emit machine-readable reports on stdout in this format.
    #[arg(long, global = true, value_enum)]
    pub report: Option<ReportFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corrupt a clean image and write the ground-truth mask.
    Corrupt(CorruptArgs),
    /// Run a detector and write its mask.
    Detect(DetectArgs),
    /// Detect and replace corrupted pixels.
    Denoise(DenoiseArgs),
    /// Compare a restored image against its clean reference.
    Evaluate(EvaluateArgs),
    /// Sweep detector parameters and report FP/FN rates.
    Roc(RocArgs),
    /// Time the switching filter for several detectors.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Corruption family: channels independent (ci) or together (ct).
    #[arg(long, default_value = "ci")]
    pub family: String,
    /// Impulse values: 1 = {0, 255}, 2 = uniform, 3 = [0,55] ∪ [200,255].
    #[arg(long, default_value_t = 1)]
    pub variant: u8,
    /// Corruption probability in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
}

impl NoiseArgs {
    fn spec(&self, seed: u64) -> CliResult<NoiseSpec> {
        let family: NoiseFamily = self.family.parse()?;
        let variant = ImpulseValues::try_from(self.variant)?;
        Ok(NoiseSpec::new(family, variant, self.p, seed)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Detection method, dm1 through dm5.
    #[arg(long, default_value = "dm5")]
    pub detector: String,
    /// Threshold of dm1/dm2.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Rank weighting of dm1/dm2: uniform, 1/r or 1/r2.
    #[arg(long)]
    pub weighting: Option<String>,
    /// Peer group radius of dm3, in [0, 1].
    #[arg(long)]
    pub d: Option<f64>,
    /// Maximum peer group size still flagged by dm3, in [0, 8].
    #[arg(long)]
    pub k: Option<i64>,
    /// dm4 schedule as `d:k` pairs, e.g. `0.25:3,0.25:2,0.15:2`.
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub pset: Option<i64>,
    #[arg(long)]
    pub mset: Option<i64>,
    #[arg(long)]
    pub level: Option<i64>,
    /// Structuring element rows, e.g. `111/111/111`.
    #[arg(long)]
    pub selem: Option<String>,
    /// dm5 parameters tuned for a noise model, e.g. `CI2`; explicit flags win.
    #[arg(long)]
    pub preset: Option<String>,
    /// dm5 `set2` reading: `complement` (pset - x) or `shift` (x - pset).
    #[arg(long)]
    pub set2: Option<String>,
}

fn byte_param(flag: &str, v: i64) -> CliResult<u8> {
    u8::try_from(v).map_err(|_| CliError::config(flag, format!("must lie in [0, 255], got {v}")))
}

fn k_param(v: i64) -> CliResult<u8> {
    if (0..=8).contains(&v) {
        Ok(v as u8)
    } else {
        Err(CliError::config(
            "k",
            format!("must lie in [0, 8], got {v}"),
        ))
    }
}

fn parse_schedule(s: &str) -> CliResult<Vec<PeerStep>> {
    let steps = s
        .split(',')
        .map(|item| {
            let (d, k) = item.split_once(':').ok_or_else(|| {
                CliError::config("schedule", format!("expected d:k, got `{item}`"))
            })?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|e| CliError::config("schedule", e))?;
            let k: i64 = k
                .trim()
                .parse()
                .map_err(|e| CliError::config("schedule", e))?;
            Ok(PeerStep::new(d, k_param(k)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(steps)
}

impl DetectorArgs {
    pub fn kind(&self) -> CliResult<DetectorKind> {
        self.detector
            .parse()
            .map_err(|e: Error| CliError::config("detector", e.to_string()))
    }

    pub fn config(&self) -> CliResult<DetectorConfig> {
        let kind = self.kind()?;
        let weighting = match &self.weighting {
            Some(w) => w.parse::<RankWeighting>()?,
            None => RankWeighting::reciprocal(),
        };
        let mut cfg = kind.default_config();
        match &mut cfg {
            DetectorConfig::Dm1 {
                alpha,
                weighting: w,
            }
            | DetectorConfig::Dm2 {
                alpha,
                weighting: w,
            } => {
                if let Some(a) = self.alpha {
                    *alpha = a;
                }
                *w = weighting;
            }
            DetectorConfig::Dm3(step) => {
                if let Some(d) = self.d {
                    step.d = d;
                }
                if let Some(k) = self.k {
                    step.k = k_param(k)?;
                }
            }
            DetectorConfig::Dm4 { schedule } => {
                if let Some(s) = &self.schedule {
                    *schedule = parse_schedule(s)?;
                }
                if let Some(first) = schedule.first_mut() {
                    if let Some(d) = self.d {
                        first.d = d;
                    }
                    if let Some(k) = self.k {
                        first.k = k_param(k)?;
                    }
                }
            }
            DetectorConfig::Dm5(m) => {
                if let Some(label) = &self.preset {
                    *m = parse_preset(label)?;
                }
                if let Some(v) = self.pset {
                    m.pset = byte_param("pset", v)?;
                }
                if let Some(v) = self.mset {
                    m.mset = byte_param("mset", v)?;
                }
                if let Some(v) = self.level {
                    m.level = byte_param("level", v)?;
                }
                if let Some(s) = &self.selem {
                    m.selem = s.parse::<StructuringElement>()?;
                }
                if let Some(s) = &self.set2 {
                    m.set2 = s.parse::<Set2Reading>()?;
                }
            }
        }
        if self.preset.is_some() && kind != DetectorKind::Dm5 {
            return Err(CliError::config("preset", "only applies to dm5"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_preset(label: &str) -> CliResult<MorphParams> {
    let bad = || {
        CliError::config(
            "preset",
            format!("expected CI1..CI3 or CT1..CT3, got `{label}`"),
        )
    };
    if label.len() != 3 || !label.is_ascii() {
        return Err(bad());
    }
    let family: NoiseFamily = label[..2].parse().map_err(|_| bad())?;
    let variant: u8 = label[2..].parse().map_err(|_| bad())?;
    let values = ImpulseValues::try_from(variant).map_err(|_| bad())?;
    Ok(MorphParams::preset(family, values))
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Ground-truth mask (`.png` or `.pbm`).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Detection mask output (`.png` or `.pbm`).
    #[arg(long)]
    pub mask: PathBuf,
    /// Ground-truth mask; when given, FP/FN counts are reported.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Clean reference; when given, a quality report is written.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Ground-truth mask for FP/FN rates in the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Report destination (default: stdout).
    #[arg(long)]
    pub report_file: Option<PathBuf>,
    /// Replacement filter for flagged pixels: vmf or amf.
    #[arg(long, default_value = "vmf")]
    pub replacement: String,
    #[arg(long, default_value_t = 1)]
    pub passes: u32,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long)]
    pub restored: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub detected: Option<PathBuf>,
    #[arg(long)]
    pub report_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    /// Clean image; it is corrupted once with the noise flags.
    #[arg(long)]
    pub input: PathBuf,
    /// Table destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Operating point rule: euclidean or sum.
    #[arg(long, default_value = "euclidean")]
    pub rule: String,
    /// Grids as `start:stop:step` (inclusive) or comma-separated values.
    #[arg(long)]
    pub alpha_grid: Option<String>,
    #[arg(long)]
    pub d_grid: Option<String>,
    #[arg(long)]
    pub k_grid: Option<String>,
    #[arg(long)]
    pub pset_grid: Option<String>,
    #[arg(long)]
    pub mset_grid: Option<String>,
    #[arg(long)]
    pub level_grid: Option<String>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated detectors, each run with its defaults.
    #[arg(long, default_value = "dm1,dm2,dm3,dm4,dm5")]
    pub detectors: String,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
    /// Corrupt the input with the noise flags before timing.
    #[arg(long)]
    pub corrupt: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    let bad = |reason: String| CliError::config(flag, reason);
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("expected start:stop:step, got `{s}`")));
        }
        let nums = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("`{p}`: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !start.is_finite() || !stop.is_finite() || step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad(format!("empty or unbounded range `{s}`")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| start + i as f64 * step).collect()
    } else {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("`{p}`: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad("grid is empty".into()));
    }
    Ok(values)
}

fn int_grid(flag: &str, s: &str, max: i64) -> CliResult<Vec<i64>> {
    parse_grid(flag, s)?
        .into_iter()
        .map(|v| {
            if v.fract() != 0.0 || v < 0.0 || v > max as f64 {
                Err(CliError::config(
                    flag,
                    format!("{v} is not an integer in [0, {max}]"),
                ))
            } else {
                Ok(v as i64)
            }
        })
        .collect()
}

/// Expands the grid flags around the base configuration.
pub fn build_grid(args: &RocArgs) -> CliResult<Vec<DetectorConfig>> {
    let base = args.detector.config()?;
    let kind = base.kind();
    let allowed: &[&str] = match kind {
        DetectorKind::Dm1 | DetectorKind::Dm2 => &["alpha-grid"],
        DetectorKind::Dm3 | DetectorKind::Dm4 => &["d-grid", "k-grid"],
        DetectorKind::Dm5 => &["pset-grid", "mset-grid", "level-grid"],
    };
    let given = [
        ("alpha-grid", &args.alpha_grid),
        ("d-grid", &args.d_grid),
        ("k-grid", &args.k_grid),
        ("pset-grid", &args.pset_grid),
        ("mset-grid", &args.mset_grid),
        ("level-grid", &args.level_grid),
    ];
    for (flag, value) in given {
        if value.is_some() && !allowed.contains(&flag) {
            return Err(CliError::config(flag, format!("does not apply to {kind}")));
        }
    }

    let mut grid = Vec::new();
    match &base {
        DetectorConfig::Dm1 { alpha, weighting } | DetectorConfig::Dm2 { alpha, weighting } => {
            let alphas = match &args.alpha_grid {
                Some(g) => parse_grid("alpha-grid", g)?,
                None => vec![*alpha],
            };
            for a in alphas {
                grid.push(match kind {
                    DetectorKind::Dm1 => DetectorConfig::Dm1 {
                        alpha: a,
                        weighting: *weighting,
                    },
                    _ => DetectorConfig::Dm2 {
                        alpha: a,
                        weighting: *weighting,
                    },
                });
            }
        }
        DetectorConfig::Dm3(_) | DetectorConfig::Dm4 { .. } => {
            let first = match &base {
                DetectorConfig::Dm4 { schedule } => schedule[0],
                DetectorConfig::Dm3(s) => *s,
                _ => unreachable!(),
            };
            let ds = match &args.d_grid {
                Some(g) => parse_grid("d-grid", g)?,
                None => vec![first.d],
            };
            let ks = match &args.k_grid {
                Some(g) => int_grid("k-grid", g, 8)?,
                None => vec![first.k as i64],
            };
            for &d in &ds {
                for &k in &ks {
                    let s = PeerStep::new(d, k as u8);
                    grid.push(match &base {
                        DetectorConfig::Dm4 { schedule } => {
                            let mut sched = schedule.clone();
                            sched[0] = s;
                            DetectorConfig::Dm4 { schedule: sched }
                        }
                        _ => DetectorConfig::Dm3(s),
                    });
                }
            }
        }
        DetectorConfig::Dm5(m) => {
            let axis = |flag: &str, g: &Option<String>, v: u8| -> CliResult<Vec<i64>> {
                match g {
                    Some(g) => int_grid(flag, g, 255),
                    None => Ok(vec![v as i64]),
                }
            };
            let psets = axis("pset-grid", &args.pset_grid, m.pset)?;
            let msets = axis("mset-grid", &args.mset_grid, m.mset)?;
            let levels = axis("level-grid", &args.level_grid, m.level)?;
            for &p in &psets {
                for &ms in &msets {
                    for &l in &levels {
                        grid.push(DetectorConfig::Dm5(MorphParams {
                            pset: p as u8,
                            mset: ms as u8,
                            level: l as u8,
                            ..m.clone()
                        }));
                    }
                }
            }
        }
    }
    for cfg in &grid {
        cfg.validate()?;
    }
    Ok(grid)
}

/// The validated description of one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub noise: Option<NoiseSpec>,
    pub detector: Option<DetectorConfig>,
    pub switching: Option<SwitchingConfig>,
    pub report: Option<ReportFormat>,
}

impl RunManifest {
    fn new(command: &'static str, report: Option<ReportFormat>) -> Self {
        RunManifest {
            command,
            inputs: Vec::new(),
            outputs: Vec::new(),
            noise: None,
            detector: None,
            switching: None,
            report,
        }
    }

    /// Checks that every input exists.
    pub fn validate(&self) -> CliResult {
        for p in &self.inputs {
            if !p.is_file() {
                return Err(CliError::input(format!(
                    "input file {} not found",
                    p.display()
                )));
            }
        }
        Ok(())
    }
}

fn load_color(path: &Path) -> CliResult<ColorImage> {
    read_color(path).map_err(CliError::input)
}

fn load_mask(path: &Path) -> CliResult<BinaryMask> {
    read_mask(path).map_err(CliError::input)
}

fn save_color(path: &Path, img: &ColorImage) -> CliResult {
    write_color(path, img).map_err(CliError::output)
}

fn save_mask(path: &Path, mask: &BinaryMask) -> CliResult {
    write_mask(path, mask).map_err(CliError::output)
}

fn open_sink(dest: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match dest {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::output(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(
    format: ReportFormat,
    dest: Option<&Path>,
    rows: &[T],
    json_single: bool,
) -> CliResult {
    let mut sink = open_sink(dest)?;
    let res = match format {
        ReportFormat::Csv => write_csv_rows(&mut sink, rows),
        ReportFormat::Json if json_single && rows.len() == 1 => write_json(&mut sink, &rows[0]),
        ReportFormat::Json => write_json(&mut sink, rows),
    };
    res.map_err(CliError::output)?;
    sink.flush().map_err(CliError::output)
}

fn cmd_corrupt(cli: &Cli, args: &CorruptArgs) -> CliResult {
    let spec = args.noise.spec(cli.seed)?;
    let mut manifest = RunManifest::new("corrupt", cli.report);
    manifest.inputs.push(args.input.clone());
    manifest.outputs.push(args.output.clone());
    manifest.outputs.extend(args.mask.clone());
    manifest.noise = Some(spec);
    manifest.validate()?;

    let clean = load_color(&args.input)?;
    let result = corrupt(&clean, &spec)?;
    save_color(&args.output, &result.noisy)?;
    if let Some(m) = &args.mask {
        save_mask(m, &result.pixel_mask)?;
    }
    match cli.report {
        Some(f) => emit(f, None, &[spec], true),
        None => {
            println!("{spec}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct DetectRow {
    detector: String,
    params: String,
    flagged: usize,
    tp: Option<u64>,
    fp: Option<u64>,
    #[serde(rename = "fn")]
    fn_: Option<u64>,
    tn: Option<u64>,
    fp_rate: Option<f64>,
    fn_rate: Option<f64>,
}

fn cmd_detect(cli: &Cli, args: &DetectArgs) -> CliResult {
    let cfg = args.detector.config()?;
    let mut manifest = RunManifest::new("detect", cli.report);
    manifest.inputs.push(args.input.clone());
    manifest.inputs.extend(args.truth.clone());
    manifest.outputs.push(args.mask.clone());
    manifest.detector = Some(cfg.clone());
    manifest.validate()?;

    let img = load_color(&args.input)?;
    let truth = args.truth.as_deref().map(load_mask).transpose()?;
    let outcome = crate::detectors::detect(&img, &cfg)?;
    save_mask(&args.mask, &outcome.mask)?;

    let counts: Option<ConfusionCounts> = truth
        .as_ref()
        .map(|t| confusion(t, &outcome.mask))
        .transpose()?;
    let row = DetectRow {
        detector: cfg.kind().to_string(),
        params: cfg.params_string(),
        flagged: outcome.mask.count_ones(),
        tp: counts.map(|c| c.tp),
        fp: counts.map(|c| c.fp),
        fn_: counts.map(|c| c.fn_),
        tn: counts.map(|c| c.tn),
        fp_rate: counts.map(|c| rates(&c).0),
        fn_rate: counts.map(|c| rates(&c).1),
    };
    match cli.report {
        Some(f) => emit(f, None, &[row], true),
        None => {
            print!("{cfg}: {} pixels flagged", row.flagged);
            if let (Some(fp), Some(fnr)) = (row.fp_rate, row.fn_rate) {
                print!(", fp_rate={fp:.4} fn_rate={fnr:.4}");
            }
            println!();
            Ok(())
        }
    }
}

fn cmd_denoise(cli: &Cli, args: &DenoiseArgs) -> CliResult {
    let detector = args.detector.config()?;
    let replacement: Replacement = args.replacement.parse()?;
    let switching = SwitchingConfig {
        detector: detector.clone(),
        replacement,
        passes: args.passes,
    };
    switching.validate()?;
    let mut manifest = RunManifest::new("denoise", cli.report);
    manifest.inputs.push(args.input.clone());
    manifest.inputs.extend(args.clean.clone());
    manifest.inputs.extend(args.truth.clone());
    manifest.outputs.push(args.output.clone());
    manifest.outputs.extend(args.mask.clone());
    manifest.detector = Some(detector);
    manifest.switching = Some(switching.clone());
    manifest.validate()?;

    let noisy = load_color(&args.input)?;
    let clean = args.clean.as_deref().map(load_color).transpose()?;
    let truth = args.truth.as_deref().map(load_mask).transpose()?;
    let run = timed_denoise(&noisy, &switching, 1)?;
    save_color(&args.output, &run.restored)?;
    if let Some(m) = &args.mask {
        save_mask(m, &run.mask)?;
    }
    if let Some(clean) = clean {
        let report = QualityReport::evaluate(
            switching.detector.kind().to_string(),
            &clean,
            &run.restored,
            truth.as_ref().map(|t| (t, &run.mask)),
            run.elapsed_seconds,
        )?;
        let format = cli.report.unwrap_or(ReportFormat::Csv);
        emit(format, args.report_file.as_deref(), &[report], true)?;
    } else if cli.report.is_none() {
        println!(
            "{}: {} pixels replaced",
            switching.detector,
            run.mask.count_ones()
        );
    }
    Ok(())
}

fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs) -> CliResult {
    let mut manifest = RunManifest::new("evaluate", cli.report);
    manifest.inputs.push(args.clean.clone());
    manifest.inputs.push(args.restored.clone());
    manifest.inputs.extend(args.truth.clone());
    manifest.inputs.extend(args.detected.clone());
    manifest.validate()?;

    let clean = load_color(&args.clean)?;
    let restored = load_color(&args.restored)?;
    let masks = match (&args.truth, &args.detected) {
        (Some(t), Some(d)) => Some((load_mask(t)?, load_mask(d)?)),
        (None, None) => None,
        _ => {
            return Err(CliError::config(
                "truth",
                "--truth and --detected must be given together",
            ))
        }
    };
    let report = QualityReport::evaluate(
        "evaluate",
        &clean,
        &restored,
        masks.as_ref().map(|(t, d)| (t, d)),
        0.0,
    )?;
    emit(
        cli.report.unwrap_or(ReportFormat::Csv),
        args.report_file.as_deref(),
        &[report],
        true,
    )
}

fn cmd_roc(cli: &Cli, args: &RocArgs) -> CliResult {
    let spec = args.noise.spec(cli.seed)?;
    let rule = match args.rule.as_str() {
        "euclidean" => SelectionRule::Euclidean,
        "sum" => SelectionRule::Sum,
        other => return Err(CliError::config("rule", format!("unknown rule `{other}`"))),
    };
    let grid = build_grid(args)?;
    let mut manifest = RunManifest::new("roc", cli.report);
    manifest.inputs.push(args.input.clone());
    manifest.outputs.extend(args.output.clone());
    manifest.noise = Some(spec);
    manifest.validate()?;

    let clean = load_color(&args.input)?;
    let sweep = roc_sweep(&clean, &spec, &grid, rule)?;
    let mut sink = open_sink(args.output.as_deref())?;
    match cli.report.unwrap_or(ReportFormat::Csv) {
        ReportFormat::Csv => write_roc_csv(&mut sink, &sweep),
        ReportFormat::Json => write_json(&mut sink, &sweep),
    }
    .map_err(CliError::output)?;
    sink.flush().map_err(CliError::output)?;
    let best = sweep.best();
    eprintln!(
        "selected {} fp_rate={:.4} fn_rate={:.4}",
        best.params, best.fp_rate, best.fn_rate
    );
    Ok(())
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> CliResult {
    let kinds = args
        .detectors
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<DetectorKind>()
                .map_err(|e| CliError::config("detectors", e))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if args.repeats == 0 {
        return Err(CliError::config("repeats", "must be at least 1"));
    }
    let mut manifest = RunManifest::new("bench", cli.report);
    manifest.inputs.push(args.input.clone());
    manifest.outputs.extend(args.output.clone());
    if args.corrupt {
        manifest.noise = Some(args.noise.spec(cli.seed)?);
    }
    manifest.validate()?;

    let mut img = load_color(&args.input)?;
    if let Some(spec) = &manifest.noise {
        img = corrupt(&img, spec)?.noisy;
    }
    let mut rows = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let cfg = SwitchingConfig::new(kind.default_config());
        let run = timed_denoise(&img, &cfg, args.repeats)?;
        rows.push(BenchRow {
            detector: kind.to_string(),
            params: cfg.detector.params_string(),
            median_seconds: run.elapsed_seconds,
            repeats: run.samples.len(),
        });
    }
    emit(
        cli.report.unwrap_or(ReportFormat::Csv),
        args.output.as_deref(),
        &rows,
        false,
    )
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let exec = || match &cli.command {
        Command::Corrupt(a) => cmd_corrupt(cli, a),
        Command::Detect(a) => cmd_detect(cli, a),
        Command::Denoise(a) => cmd_denoise(cli, a),
        Command::Evaluate(a) => cmd_evaluate(cli, a),
        Command::Roc(a) => cmd_roc(cli, a),
        Command::Bench(a) => cmd_bench(cli, a),
    };
    let result = match cli.threads {
        Some(0) => Err(CliError::config("threads", "must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(exec),
            Err(e) => Err(CliError::config("threads", e)),
        },
        None => exec(),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Parses `args` and runs; argument errors exit with [`EXIT_CONFIG`].
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}
