//! Image and mask files.
//!
//! Color images: 8-bit RGB PNG or binary PPM (`P6`), chosen by extension on
//! write and by content on read. Masks: 1-bit grayscale PNG (white = set) or
//! binary PBM (`P4`, bit 1 = set).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::{ImageFormat, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, ColorImage};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn decode_err(path: &Path, reason: impl ToString) -> Error {
    Error::Decode {
        path: path.display().to_string(),
        reason: reason.to_string(),
    }
}

fn encode_err(path: &Path, reason: impl ToString) -> Error {
    Error::Encode {
        path: path.display().to_string(),
        reason: reason.to_string(),
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

pub fn read_color(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| io_err(path, e))?
        .with_guessed_format()
        .map_err(|e| io_err(path, e))?;
    let rgb = reader.decode().map_err(|e| decode_err(path, e))?.to_rgb8();
    ColorImage::from_rgb_bytes(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
        .map_err(|e| decode_err(path, e))
}

pub fn write_color(path: impl AsRef<Path>, img: &ColorImage) -> Result<()> {
    let path = path.as_ref();
    let format = match extension(path).as_str() {
        "png" => ImageFormat::Png,
        "ppm" | "pnm" => ImageFormat::Pnm,
        other => return Err(encode_err(path, format!("unsupported extension `{other}`"))),
    };
    let buf = RgbImage::from_raw(img.width() as u32, img.height() as u32, img.to_rgb_bytes())
        .expect("buffer length matches dimensions");
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    buf.write_to(&mut out, format)
        .map_err(|e| encode_err(path, e))?;
    out.flush().map_err(|e| io_err(path, e))
}

fn packed_rows(mask: &BinaryMask) -> Vec<u8> {
    let stride = mask.width().div_ceil(8);
    let mut data = vec![0u8; stride * mask.height()];
    for row in 0..mask.height() {
        for col in 0..mask.width() {
            if mask.get(row, col) {
                data[row * stride + col / 8] |= 0x80 >> (col % 8);
            }
        }
    }
    data
}

fn unpack_rows(width: usize, height: usize, data: &[u8]) -> Vec<bool> {
    let stride = width.div_ceil(8);
    (0..height)
        .flat_map(|row| (0..width).map(move |col| (row, col)))
        .map(|(row, col)| data[row * stride + col / 8] & (0x80 >> (col % 8)) != 0)
        .collect()
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let path = path.as_ref();
    let kind = extension(path);
    if kind != "png" && kind != "pbm" {
        return Err(encode_err(
            path,
            format!("unsupported mask extension `{kind}`"),
        ));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    let data = packed_rows(mask);
    if kind == "pbm" {
        write!(out, "P4\n{} {}\n", mask.width(), mask.height()).map_err(|e| io_err(path, e))?;
        out.write_all(&data).map_err(|e| io_err(path, e))?;
    } else {
        let mut enc = png::Encoder::new(&mut out, mask.width() as u32, mask.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::One);
        let mut writer = enc.write_header().map_err(|e| encode_err(path, e))?;
        writer
            .write_image_data(&data)
            .map_err(|e| encode_err(path, e))?;
        writer.finish().map_err(|e| encode_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

fn pbm_token(reader: &mut impl BufRead, path: &Path) -> Result<String> {
    let mut token = String::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte).map_err(|e| io_err(path, e))? == 0 {
            break;
        }
        let c = byte[0] as char;
        if c == '#' {
            let mut comment = Vec::new();
            reader
                .read_until(b'\n', &mut comment)
                .map_err(|e| io_err(path, e))?;
            if !token.is_empty() {
                break;
            }
        } else if c.is_ascii_whitespace() {
            if !token.is_empty() {
                break;
            }
        } else {
            token.push(c);
        }
    }
    if token.is_empty() {
        return Err(decode_err(path, "truncated PBM header"));
    }
    Ok(token)
}

fn read_pbm(path: &Path) -> Result<BinaryMask> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    if pbm_token(&mut reader, path)? != "P4" {
        return Err(decode_err(path, "only binary PBM (P4) is supported"));
    }
    let mut dim = || -> Result<usize> {
        pbm_token(&mut reader, path)?
            .parse()
            .map_err(|e| decode_err(path, e))
    };
    let (width, height) = (dim()?, dim()?);
    let mut data = vec![0u8; width.div_ceil(8) * height];
    reader
        .read_exact(&mut data)
        .map_err(|e| decode_err(path, e))?;
    BinaryMask::new(width, height, unpack_rows(width, height, &data))
        .map_err(|e| decode_err(path, e))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    if extension(path) == "pbm" {
        return read_pbm(path);
    }
    let reader = ImageReader::open(path)
        .map_err(|e| io_err(path, e))?
        .with_guessed_format()
        .map_err(|e| io_err(path, e))?;
    let luma = reader.decode().map_err(|e| decode_err(path, e))?.to_luma8();
    let bits = luma.as_raw().iter().map(|&v| v > 127).collect();
    BinaryMask::new(luma.width() as usize, luma.height() as usize, bits)
        .map_err(|e| decode_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Pixel;

    fn sample() -> ColorImage {
        ColorImage::from_fn(13, 7, |r, c| {
            Pixel::new((r * 31) as u8, (c * 19) as u8, (r * c) as u8)
        })
        .unwrap()
    }

    fn sample_mask() -> BinaryMask {
        BinaryMask::from_fn(13, 7, |r, c| (r * 3 + c * 5) % 7 < 3)
    }

    #[test]
    fn color_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.png", "a.ppm"] {
            let p = dir.path().join(name);
            write_color(&p, &sample()).unwrap();
            assert_eq!(read_color(&p).unwrap(), sample());
        }
        let bad = dir.path().join("a.gif");
        assert!(matches!(
            write_color(&bad, &sample()),
            Err(Error::Encode { .. })
        ));
    }

    #[test]
    fn mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["m.png", "m.pbm"] {
            let p = dir.path().join(name);
            write_mask(&p, &sample_mask()).unwrap();
            assert_eq!(read_mask(&p).unwrap(), sample_mask(), "{name}");
        }
    }

    #[test]
    fn pbm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pbm");
        let m = BinaryMask::new(3, 2, vec![true, false, true, false, true, false]).unwrap();
        write_mask(&p, &m).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"P4\n3 2\n\xa0\x40");
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            read_color("/nonexistent/x.png"),
            Err(Error::Io { .. })
        ));
    }
}
