//! C ABI for `impulse-denoise`.
//!
//! Images, masks and detector configurations cross the boundary as opaque
//! handles created and freed by this library. Every fallible function returns
//! an [`IdStatus`]; on failure [`id_last_error`] describes the problem. Output
//! handles are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use impulse_denoise::detectors::{MorphParams, Set2Reading};
use impulse_denoise::{
    corrupt, denoise, detect, io, mse_psnr, BinaryMask, ColorImage, DetectorConfig, DetectorKind,
    Error, ImpulseValues, NoiseFamily, NoiseSpec, PeerStep, RankWeighting, Replacement,
    SwitchingConfig,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Io = 4,
    Decode = 5,
    Encode = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdFamily {
    Ci = 0,
    Ct = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdDetectorKind {
    Dm1 = 1,
    Dm2 = 2,
    Dm3 = 3,
    Dm4 = 4,
    Dm5 = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdWeighting {
    Uniform = 0,
    Reciprocal = 1,
    ReciprocalSquared = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdSet2 {
    Complement = 0,
    Shift = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdReplacement {
    Vmf = 0,
    Amf = 1,
}

/// One `(d, k)` step of the iterative peer group detector.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IdPeerStep {
    pub d: f64,
    pub k: u8,
}

/// An RGB image.
pub struct IdImage(ColorImage);

/// A binary mask, one bit per pixel.
pub struct IdMask(BinaryMask);

/// A validated detector configuration.
pub struct IdDetector(DetectorConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Failure(IdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config { .. } | Error::InvalidImage(_) | Error::Coordinate { .. } => {
                IdStatus::InvalidArgument
            }
            Error::Shape { .. } => IdStatus::ShapeMismatch,
            Error::Io { .. } => IdStatus::Io,
            Error::Decode { .. } => IdStatus::Decode,
            Error::Encode { .. } => IdStatus::Encode,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(IdStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(IdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(
            IdStatus::NullPointer,
            "output pointer is null".into(),
        ));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(IdStatus::NullPointer, "path is null".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn id_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn id_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates an image from `width * height * 3` interleaved RGB bytes.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_image_from_rgb(
    width: usize,
    height: usize,
    data: *const u8,
    len: usize,
    out: *mut *mut IdImage,
) -> IdStatus {
    guard(|| {
        if data.is_null() {
            return Err(Failure(IdStatus::NullPointer, "data is null".into()));
        }
        if Some(len) != width.checked_mul(height).and_then(|n| n.checked_mul(3)) {
            return Err(invalid(format!(
                "expected {width}x{height}x3 bytes, got {len}"
            )));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let img = ColorImage::from_rgb_bytes(width, height, bytes)?;
        write_out(out, IdImage(img))
    })
}

/// Reads a PNG or PPM file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_image_read(path: *const c_char, out: *mut *mut IdImage) -> IdStatus {
    guard(|| {
        let img = io::read_color(path_arg(path)?)?;
        write_out(out, IdImage(img))
    })
}

/// Writes a `.png` or `.ppm` file, chosen by extension.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn id_image_write(img: *const IdImage, path: *const c_char) -> IdStatus {
    guard(|| {
        let img = deref(img, "image")?;
        Ok(io::write_color(path_arg(path)?, &img.0)?)
    })
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn id_image_width(img: *const IdImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.width())
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn id_image_height(img: *const IdImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.height())
}

/// Copies the interleaved RGB bytes into `buf`, which must hold exactly
/// `width * height * 3` bytes.
///
/// # Safety
/// `img` must be a live handle and `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn id_image_copy_rgb(
    img: *const IdImage,
    buf: *mut u8,
    len: usize,
) -> IdStatus {
    guard(|| {
        let img = deref(img, "image")?;
        if buf.is_null() {
            return Err(Failure(IdStatus::NullPointer, "buffer is null".into()));
        }
        let bytes = img.0.to_rgb_bytes();
        if bytes.len() != len {
            return Err(invalid(format!(
                "buffer holds {len} bytes, image needs {}",
                bytes.len()
            )));
        }
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf, len);
        Ok(())
    })
}

/// # Safety
/// `img` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn id_image_free(img: *mut IdImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// # Safety
/// `mask` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn id_mask_width(mask: *const IdMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.width())
}

/// # Safety
/// `mask` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn id_mask_height(mask: *const IdMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.height())
}

/// Number of set pixels.
///
/// # Safety
/// `mask` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn id_mask_count(mask: *const IdMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.count_ones())
}

/// Copies the mask row-major into `buf`, one byte per pixel (1 = set).
///
/// # Safety
/// `mask` must be a live handle and `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn id_mask_copy(mask: *const IdMask, buf: *mut u8, len: usize) -> IdStatus {
    guard(|| {
        let mask = deref(mask, "mask")?;
        if buf.is_null() {
            return Err(Failure(IdStatus::NullPointer, "buffer is null".into()));
        }
        let bits = mask.0.bits();
        if bits.len() != len {
            return Err(invalid(format!(
                "buffer holds {len} bytes, mask needs {}",
                bits.len()
            )));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (o, &b) in out.iter_mut().zip(bits) {
            *o = b as u8;
        }
        Ok(())
    })
}

/// Writes a `.png` or `.pbm` mask file.
///
/// # Safety
/// `mask` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn id_mask_write(mask: *const IdMask, path: *const c_char) -> IdStatus {
    guard(|| {
        let mask = deref(mask, "mask")?;
        Ok(io::write_mask(path_arg(path)?, &mask.0)?)
    })
}

/// # Safety
/// `mask` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn id_mask_free(mask: *mut IdMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// Corrupts `img` with impulse noise. `variant` is 1 (extremes), 2 (uniform)
/// or 3 (tails). `out_mask` may be null when the ground truth is not needed.
///
/// # Safety
/// `img` must be a live handle; `out_noisy` (and `out_mask` if non-null) must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_corrupt(
    img: *const IdImage,
    family: IdFamily,
    variant: u8,
    p: f64,
    seed: u64,
    out_noisy: *mut *mut IdImage,
    out_mask: *mut *mut IdMask,
) -> IdStatus {
    guard(|| {
        let img = deref(img, "image")?;
        if out_noisy.is_null() {
            return Err(Failure(
                IdStatus::NullPointer,
                "output pointer is null".into(),
            ));
        }
        let family = match family {
            IdFamily::Ci => NoiseFamily::Ci,
            IdFamily::Ct => NoiseFamily::Ct,
        };
        let spec = NoiseSpec::new(family, ImpulseValues::try_from(variant)?, p, seed)?;
        let res = corrupt(&img.0, &spec)?;
        if !out_mask.is_null() {
            write_out(out_mask, IdMask(res.pixel_mask))?;
        }
        write_out(out_noisy, IdImage(res.noisy))
    })
}

fn weighting(w: IdWeighting) -> RankWeighting {
    match w {
        IdWeighting::Uniform => RankWeighting::uniform(),
        IdWeighting::Reciprocal => RankWeighting::reciprocal(),
        IdWeighting::ReciprocalSquared => RankWeighting::reciprocal_squared(),
    }
}

unsafe fn new_detector(cfg: DetectorConfig, out: *mut *mut IdDetector) -> Result<(), Failure> {
    cfg.validate()?;
    write_out(out, IdDetector(cfg))
}

/// Detector with its built-in default parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_detector_default(
    kind: IdDetectorKind,
    out: *mut *mut IdDetector,
) -> IdStatus {
    let kind = match kind {
        IdDetectorKind::Dm1 => DetectorKind::Dm1,
        IdDetectorKind::Dm2 => DetectorKind::Dm2,
        IdDetectorKind::Dm3 => DetectorKind::Dm3,
        IdDetectorKind::Dm4 => DetectorKind::Dm4,
        IdDetectorKind::Dm5 => DetectorKind::Dm5,
    };
    guard(|| new_detector(kind.default_config(), out))
}

/// Rank-weighted threshold detector: `dm1` when `minimum_only` is false
/// (center score minus window minimum), `dm2` otherwise (window minimum).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_detector_rank(
    alpha: f64,
    w: IdWeighting,
    minimum_only: bool,
    out: *mut *mut IdDetector,
) -> IdStatus {
    let weighting = weighting(w);
    let cfg = if minimum_only {
        DetectorConfig::Dm2 { alpha, weighting }
    } else {
        DetectorConfig::Dm1 { alpha, weighting }
    };
    guard(|| new_detector(cfg, out))
}

/// Peer group detector (`dm3`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_detector_peer(d: f64, k: u8, out: *mut *mut IdDetector) -> IdStatus {
    guard(|| new_detector(DetectorConfig::Dm3(PeerStep::new(d, k)), out))
}

/// Iterative peer group detector (`dm4`) over `len` steps.
///
/// # Safety
/// `steps` must point to `len` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_detector_peer_schedule(
    steps: *const IdPeerStep,
    len: usize,
    out: *mut *mut IdDetector,
) -> IdStatus {
    guard(|| {
        if steps.is_null() && len > 0 {
            return Err(Failure(IdStatus::NullPointer, "steps is null".into()));
        }
        let schedule = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(steps, len)
                .iter()
                .map(|s| PeerStep::new(s.d, s.k))
                .collect()
        };
        new_detector(DetectorConfig::Dm4 { schedule }, out)
    })
}

/// Morphological detector (`dm5`) with a 3x3 square structuring element.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_detector_morph(
    pset: u8,
    mset: u8,
    level: u8,
    set2: IdSet2,
    out: *mut *mut IdDetector,
) -> IdStatus {
    let mut params = MorphParams::new(pset, mset, level);
    params.set2 = match set2 {
        IdSet2::Complement => Set2Reading::Complement,
        IdSet2::Shift => Set2Reading::Shift,
    };
    guard(|| new_detector(DetectorConfig::Dm5(params), out))
}

/// # Safety
/// `det` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn id_detector_free(det: *mut IdDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Runs a detector.
///
/// # Safety
/// `img` and `det` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_detect(
    img: *const IdImage,
    det: *const IdDetector,
    out: *mut *mut IdMask,
) -> IdStatus {
    guard(|| {
        let (img, det) = (deref(img, "image")?, deref(det, "detector")?);
        let outcome = detect(&img.0, &det.0)?;
        write_out(out, IdMask(outcome.mask))
    })
}

/// Switching filter: detect, then replace flagged pixels, `passes` times.
/// `out_mask` (union of all detections) may be null.
///
/// # Safety
/// `img` and `det` must be live handles; `out_img` (and `out_mask` if non-null) must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_denoise(
    img: *const IdImage,
    det: *const IdDetector,
    replacement: IdReplacement,
    passes: u32,
    out_img: *mut *mut IdImage,
    out_mask: *mut *mut IdMask,
) -> IdStatus {
    guard(|| {
        let (img, det) = (deref(img, "image")?, deref(det, "detector")?);
        if out_img.is_null() {
            return Err(Failure(
                IdStatus::NullPointer,
                "output pointer is null".into(),
            ));
        }
        let cfg = SwitchingConfig {
            detector: det.0.clone(),
            replacement: match replacement {
                IdReplacement::Vmf => Replacement::Vmf,
                IdReplacement::Amf => Replacement::Amf,
            },
            passes,
        };
        let (restored, mask) = denoise(&img.0, &cfg)?;
        if !out_mask.is_null() {
            write_out(out_mask, IdMask(mask))?;
        }
        write_out(out_img, IdImage(restored))
    })
}

/// Mean squared error over all channels and PSNR in dB (+inf when equal).
///
/// # Safety
/// `a` and `b` must be live handles; `mse` and `psnr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn id_mse_psnr(
    a: *const IdImage,
    b: *const IdImage,
    mse: *mut f64,
    psnr: *mut f64,
) -> IdStatus {
    guard(|| {
        let (a, b) = (deref(a, "image")?, deref(b, "image")?);
        if mse.is_null() || psnr.is_null() {
            return Err(Failure(
                IdStatus::NullPointer,
                "output pointer is null".into(),
            ));
        }
        let (m, p) = mse_psnr(&a.0, &b.0)?;
        *mse = m;
        *psnr = p;
        Ok(())
    })
}
