//! Brute-force references shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;

use impulse_denoise::image::WINDOW_LEN;
use impulse_denoise::morphology::StructuringElement;
use impulse_denoise::{BinaryMask, Pixel};
use rand::Rng;

pub const TEST_IMAGE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/ihc.png");

fn dist(a: Pixel, b: Pixel) -> f64 {
    let d = |x: u8, y: u8| (x as f64 - y as f64).powi(2);
    (d(a.r, b.r) + d(a.g, b.g) + d(a.b, b.b)).sqrt()
}

fn first_argmin(scores: &[f64]) -> usize {
    let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    scores.iter().position(|&s| s == min).unwrap()
}

/// Exhaustive vector median: index minimizing the summed distances.
pub fn brute_vmf_index(values: &[Pixel; WINDOW_LEN]) -> usize {
    let scores: Vec<f64> = values
        .iter()
        .map(|&a| values.iter().map(|&b| dist(a, b)).sum())
        .collect();
    first_argmin(&scores)
}

/// Exhaustive rank-weighted vector median with weights `w(rank)`, rank from 1.
pub fn brute_rwvmf_index(values: &[Pixel; WINDOW_LEN], w: impl Fn(usize) -> f64) -> usize {
    let scores: Vec<f64> = values
        .iter()
        .map(|&a| {
            let mut d: Vec<f64> = values.iter().map(|&b| dist(a, b)).collect();
            d.sort_by(f64::total_cmp);
            d.iter().enumerate().map(|(r, x)| w(r + 1) * x).sum()
        })
        .collect();
    first_argmin(&scores)
}

/// Random window; a small palette half of the time so that ties occur.
pub fn random_window(rng: &mut impl Rng) -> [Pixel; WINDOW_LEN] {
    let palette: Vec<Pixel> = (0..3)
        .map(|_| Pixel::new(rng.random(), rng.random(), rng.random()))
        .collect();
    let small = rng.random_bool(0.5);
    std::array::from_fn(|_| {
        if small {
            palette[rng.random_range(0..palette.len())]
        } else {
            Pixel::new(rng.random(), rng.random(), rng.random())
        }
    })
}

pub fn random_mask(rng: &mut impl Rng, width: usize, height: usize) -> BinaryMask {
    let density = rng.random_range(0.05..0.95);
    let bits = (0..width * height)
        .map(|_| rng.random_bool(density))
        .collect();
    BinaryMask::new(width, height, bits).unwrap()
}

/// A binary image as a set of points of the plane.
pub type PointSet = HashSet<(i64, i64)>;

pub fn to_set(m: &BinaryMask) -> PointSet {
    let mut s = PointSet::new();
    for r in 0..m.height() {
        for c in 0..m.width() {
            if m.get(r, c) {
                s.insert((r as i64, c as i64));
            }
        }
    }
    s
}

/// Points of `s` inside the `width` x `height` raster.
pub fn to_mask(s: &PointSet, width: usize, height: usize) -> BinaryMask {
    BinaryMask::from_fn(width, height, |r, c| s.contains(&(r as i64, c as i64)))
}

fn selem_points(b: &StructuringElement) -> Vec<(i64, i64)> {
    let (or, oc) = ((b.height() / 2) as i64, (b.width() / 2) as i64);
    let mut pts = Vec::new();
    for r in 0..b.height() {
        for c in 0..b.width() {
            if b.get(r, c) {
                pts.push((r as i64 - or, c as i64 - oc));
            }
        }
    }
    pts
}

/// Minkowski sum {a + b}.
pub fn set_dilate(a: &PointSet, b: &StructuringElement) -> PointSet {
    let bp = selem_points(b);
    a.iter()
        .flat_map(|&(r, c)| bp.iter().map(move |&(dr, dc)| (r + dr, c + dc)))
        .collect()
}

/// {z : z + b in A for all b}. Candidates are translates of A by -b.
pub fn set_erode(a: &PointSet, b: &StructuringElement) -> PointSet {
    let bp = selem_points(b);
    a.iter()
        .flat_map(|&(r, c)| bp.iter().map(move |&(dr, dc)| (r - dr, c - dc)))
        .filter(|&(r, c)| bp.iter().all(|&(dr, dc)| a.contains(&(r + dr, c + dc))))
        .collect()
}

pub fn set_close(a: &PointSet, b: &StructuringElement) -> PointSet {
    set_erode(&set_dilate(a, b), b)
}

pub fn set_open(a: &PointSet, b: &StructuringElement) -> PointSet {
    set_dilate(&set_erode(a, b), b)
}

pub fn subset(a: &BinaryMask, b: &BinaryMask) -> bool {
    a.difference(b).is_empty_set()
}
