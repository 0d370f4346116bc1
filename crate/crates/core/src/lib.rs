//! Impulse noise removal for color images.
//!
//! The crate covers the whole experiment loop: corrupting an image with one of
//! six impulse noise models ([`noise`]), detecting the corrupted pixels with
//! one of five detectors ([`detectors`]), replacing them through a switching
//! vector median filter ([`pipeline`]) and scoring the result ([`eval`]).

pub mod cli;
pub mod detectors;
pub mod error;
pub mod eval;
pub mod image;
pub mod io;
pub mod morphology;
pub mod noise;
pub mod pipeline;
pub mod vector;

pub use crate::detectors::{
    detect, DetectionOutcome, DetectorConfig, DetectorKind, MorphParams, PeerStep,
};
pub use crate::error::{Error, Result};
pub use crate::eval::{mse_psnr, roc_sweep, QualityReport, RocPoint, RocSweep};
pub use crate::image::{BinaryMask, ColorImage, GrayImage, Pixel, Window};
pub use crate::noise::{corrupt, CorruptionResult, ImpulseValues, NoiseFamily, NoiseSpec};
pub use crate::pipeline::{denoise, plain_vmf_image, Replacement, SwitchingConfig};
pub use crate::vector::RankWeighting;
