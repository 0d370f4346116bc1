use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use impulse_denoise_ffi::*;

fn gradient(w: usize, h: usize) -> Vec<u8> {
    (0..w * h)
        .flat_map(|i| {
            let (r, c) = (i / w, i % w);
            [(60 + r) as u8, (70 + c) as u8, ((r + c) % 40 + 90) as u8]
        })
        .collect()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(id_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn image_round_trip() {
    let (w, h) = (13, 9);
    let data = gradient(w, h);
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(
            id_image_from_rgb(w, h, data.as_ptr(), data.len(), &mut img),
            IdStatus::Ok
        );
        assert_eq!((id_image_width(img), id_image_height(img)), (w, h));
        let mut back = vec![0u8; data.len()];
        assert_eq!(
            id_image_copy_rgb(img, back.as_mut_ptr(), back.len()),
            IdStatus::Ok
        );
        assert_eq!(back, data);
        assert_eq!(
            id_image_copy_rgb(img, back.as_mut_ptr(), 5),
            IdStatus::InvalidArgument
        );

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("x.ppm").to_str().unwrap()).unwrap();
        assert_eq!(id_image_write(img, path.as_ptr()), IdStatus::Ok);
        let mut read = ptr::null_mut();
        assert_eq!(id_image_read(path.as_ptr(), &mut read), IdStatus::Ok);
        let (mut mse, mut psnr) = (1.0, 0.0);
        assert_eq!(id_mse_psnr(img, read, &mut mse, &mut psnr), IdStatus::Ok);
        assert_eq!(mse, 0.0);
        assert!(psnr.is_infinite());
        id_image_free(read);
        id_image_free(img);
    }
}

#[test]
fn corrupt_detect_denoise() {
    let (w, h) = (40, 32);
    let data = gradient(w, h);
    unsafe {
        let mut clean = ptr::null_mut();
        assert_eq!(
            id_image_from_rgb(w, h, data.as_ptr(), data.len(), &mut clean),
            IdStatus::Ok
        );
        let (mut noisy, mut truth) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            id_corrupt(clean, IdFamily::Ci, 1, 0.2, 5, &mut noisy, &mut truth),
            IdStatus::Ok
        );
        assert!(id_mask_count(truth) > 0);

        let mut det = ptr::null_mut();
        assert_eq!(
            id_detector_default(IdDetectorKind::Dm5, &mut det),
            IdStatus::Ok
        );
        let mut found = ptr::null_mut();
        assert_eq!(id_detect(noisy, det, &mut found), IdStatus::Ok);
        assert_eq!((id_mask_width(found), id_mask_height(found)), (w, h));
        let mut bits = vec![9u8; w * h];
        assert_eq!(
            id_mask_copy(found, bits.as_mut_ptr(), bits.len()),
            IdStatus::Ok
        );
        assert!(bits.iter().all(|&b| b <= 1));
        assert_eq!(
            bits.iter().filter(|&&b| b == 1).count(),
            id_mask_count(found)
        );

        let (mut restored, mut used) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            id_denoise(noisy, det, IdReplacement::Vmf, 1, &mut restored, &mut used),
            IdStatus::Ok
        );
        let (mut m0, mut p0, mut m1, mut p1) = (0.0, 0.0, 0.0, 0.0);
        id_mse_psnr(clean, noisy, &mut m0, &mut p0);
        id_mse_psnr(clean, restored, &mut m1, &mut p1);
        assert!(p1 > p0, "{p1} <= {p0}");

        id_mask_free(used);
        id_image_free(restored);
        id_mask_free(found);
        id_detector_free(det);
        id_mask_free(truth);
        id_image_free(noisy);
        id_image_free(clean);
    }
}

#[test]
fn detector_constructors_validate() {
    unsafe {
        let mut det = ptr::null_mut();
        assert_eq!(
            id_detector_rank(20.0, IdWeighting::Reciprocal, false, &mut det),
            IdStatus::Ok
        );
        id_detector_free(det);
        assert_eq!(
            id_detector_rank(-1.0, IdWeighting::Uniform, true, &mut det),
            IdStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());
        assert_eq!(
            id_detector_peer(1.5, 2, &mut det),
            IdStatus::InvalidArgument
        );
        assert_eq!(
            id_detector_peer(0.1, 9, &mut det),
            IdStatus::InvalidArgument
        );
        let steps = [IdPeerStep { d: 0.1, k: 2 }, IdPeerStep { d: 0.2, k: 3 }];
        assert_eq!(
            id_detector_peer_schedule(steps.as_ptr(), 2, &mut det),
            IdStatus::Ok
        );
        id_detector_free(det);
        assert_eq!(
            id_detector_peer_schedule(ptr::null(), 0, &mut det),
            IdStatus::InvalidArgument
        );
        assert_eq!(
            id_detector_morph(200, 50, 40, IdSet2::Shift, &mut det),
            IdStatus::Ok
        );
        id_detector_free(det);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(
            id_image_from_rgb(2, 2, ptr::null(), 12, &mut img),
            IdStatus::NullPointer
        );
        let data = [0u8; 11];
        assert_eq!(
            id_image_from_rgb(2, 2, data.as_ptr(), 11, &mut img),
            IdStatus::InvalidArgument
        );
        assert!(img.is_null());
        assert!(last_error().contains("11"));

        let missing = CString::new("/nonexistent/in.png").unwrap();
        assert_eq!(id_image_read(missing.as_ptr(), &mut img), IdStatus::Io);
        assert_eq!(id_image_width(ptr::null()), 0);
        id_image_free(ptr::null_mut());

        let data = [0u8; 12];
        assert_eq!(
            id_image_from_rgb(2, 2, data.as_ptr(), 12, &mut img),
            IdStatus::InvalidArgument
        );
        let data = [0u8; 27];
        assert_eq!(
            id_image_from_rgb(3, 3, data.as_ptr(), 27, &mut img),
            IdStatus::Ok
        );
        let (mut noisy, mut truth) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            id_corrupt(img, IdFamily::Ct, 4, 0.1, 0, &mut noisy, &mut truth),
            IdStatus::InvalidArgument
        );
        assert_eq!(
            id_corrupt(img, IdFamily::Ct, 2, 1.5, 0, &mut noisy, &mut truth),
            IdStatus::InvalidArgument
        );
        assert_eq!(
            id_corrupt(img, IdFamily::Ct, 2, 0.5, 0, &mut noisy, ptr::null_mut()),
            IdStatus::Ok
        );
        id_image_free(noisy);
        id_image_free(img);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(id_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> String {
    std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/impulse_denoise.h"
    ))
    .unwrap()
}

#[test]
fn header_declares_every_export() {
    let h = header();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let mut n = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(
                h.contains(&format!("{name}(")),
                "{name} missing from header"
            );
            n += 1;
        }
    }
    assert!(n >= 20);
    assert!(h.contains("typedef struct IdImage IdImage;"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"impulse_denoise.h\"\n\
         int main(void) {\n\
           IdImage *img = NULL;\n\
           IdStatus s = id_image_read(\"x.png\", &img);\n\
           return s == ID_STATUS_OK ? (int)id_image_width(img) : 1;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler)
            .args([
                "-fsyntax-only",
                "-Wall",
                "-Werror",
                "-x",
                lang,
                "-I",
                include,
            ])
            .arg(&src)
            .output()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(
            out.status.success(),
            "{compiler}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
