//! Grid search for the morphological detector defaults.
//!
//! Usage: `cargo run --release --example tune_morph -- IMAGE [STEP] [shift|complement]`
//!
//! Every (pset, mset, level) triple on the grid is scored on CI1 and CT1 at
//! p = 0.1, 0.2, 0.3; the table lists the worst FN and FP rate over the six
//! models, best triples first. Sub-masks only depend on some of the three
//! parameters, so they are cached per axis value and merged as bitsets.

use impulse_denoise::detectors::Set2Reading;
use impulse_denoise::image::{
    channel_shift, channel_shift_color, rgb_to_gray, subtract_from, subtract_from_color,
    threshold_bw,
};
use impulse_denoise::io::read_color;
use impulse_denoise::morphology::{
    bottom_hat, gray_bottom_hat, remove_interior, StructuringElement,
};
use impulse_denoise::noise::{corrupt, ImpulseValues, NoiseFamily, NoiseSpec};
use impulse_denoise::{BinaryMask, ColorImage, GrayImage};

fn pack(m: &BinaryMask) -> Vec<u64> {
    let mut words = vec![0u64; m.bits().len().div_ceil(64)];
    for (i, &b) in m.bits().iter().enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

fn or(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

fn union(masks: impl IntoIterator<Item = BinaryMask>) -> BinaryMask {
    masks.into_iter().reduce(|a, b| a.union(&b)).unwrap()
}

struct Model {
    img: ColorImage,
    planes: [GrayImage; 3],
    truth: Vec<u64>,
    positives: u32,
    negatives: u32,
    // indexed by axis position
    set1_residues: Vec<[GrayImage; 3]>,
    set2_planes: Vec<[GrayImage; 3]>,
    set2_residues: Vec<[GrayImage; 3]>,
    set2_gray: Vec<GrayImage>,
}

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().expect("usage: tune_morph IMAGE [STEP]");
    let step: usize = args.next().map_or(10, |s| s.parse().expect("STEP"));
    let reading: Set2Reading = args
        .next()
        .map_or(Set2Reading::default(), |s| s.parse().expect("set2 reading"));
    let set2 = |x: &GrayImage, s: u8| match reading {
        Set2Reading::Shift => channel_shift(x, -(s as i32)),
        Set2Reading::Complement => subtract_from(x, s),
    };
    let set2_color = |x: &ColorImage, s: u8| match reading {
        Set2Reading::Shift => channel_shift_color(x, -(s as i32)),
        Set2Reading::Complement => subtract_from_color(x, s),
    };
    let clean = read_color(&path).expect("readable image");
    let b = StructuringElement::square3();
    let axis: Vec<u8> = (0..=255).step_by(step).map(|v| v as u8).collect();

    let models: Vec<Model> = [NoiseFamily::Ci, NoiseFamily::Ct]
        .into_iter()
        .flat_map(|f| [0.1, 0.2, 0.3].map(move |p| (f, p)))
        .map(|(f, p)| {
            let spec = NoiseSpec::new(f, ImpulseValues::Extremes, p, 7).unwrap();
            let c = corrupt(&clean, &spec).unwrap();
            let planes = [c.noisy.channel(0), c.noisy.channel(1), c.noisy.channel(2)];
            let set1_residues = axis
                .iter()
                .map(|&s| {
                    std::array::from_fn(|ch| {
                        gray_bottom_hat(&channel_shift(&planes[ch], -(s as i32)), &b)
                    })
                })
                .collect();
            let set2_planes: Vec<[GrayImage; 3]> = axis
                .iter()
                .map(|&s| std::array::from_fn(|ch| set2(&planes[ch], s)))
                .collect();
            let set2_residues = set2_planes
                .iter()
                .map(|ys| std::array::from_fn(|ch| gray_bottom_hat(&ys[ch], &b)))
                .collect();
            let set2_gray = axis
                .iter()
                .map(|&s| rgb_to_gray(&set2_color(&c.noisy, s)))
                .collect();
            let positives = c.pixel_mask.count_ones() as u32;
            Model {
                negatives: c.noisy.len() as u32 - positives,
                truth: pack(&c.pixel_mask),
                positives,
                img: c.noisy,
                planes,
                set1_residues,
                set2_planes,
                set2_residues,
                set2_gray,
            }
        })
        .collect();

    let n = axis.len();
    // worst (fp, fn) over the models, indexed [level][pset][mset]
    let mut worst = vec![vec![vec![(0f64, 0f64); n]; n]; n];
    // per model: best (score, fp, fn, pset, mset, level)
    let mut per_model = vec![(f64::INFINITY, 0f64, 0f64, 0u8, 0u8, 0u8); models.len()];
    for (li, &level) in axis.iter().enumerate() {
        for (k, m) in models.iter().enumerate() {
            let m4 = pack(&bottom_hat(&threshold_bw(&rgb_to_gray(&m.img), level), &b));
            let residue_mask =
                |r: &[GrayImage; 3]| pack(&union(r.iter().map(|g| threshold_bw(g, level))));
            let boundary = |ys: &[GrayImage]| {
                pack(&remove_interior(&union(
                    ys.iter().map(|y| threshold_bw(y, level)),
                )))
            };
            let by_pset: Vec<Vec<u64>> = (0..n)
                .map(|i| {
                    let m1 = residue_mask(&m.set2_residues[i]);
                    let m2 = boundary(&m.set2_planes[i]);
                    let m5 = pack(&bottom_hat(&threshold_bw(&m.set2_gray[i], level), &b));
                    or(&or(&or(&m2, &m5), &m1), &m4)
                })
                .collect();
            let by_mset: Vec<Vec<u64>> = (0..n)
                .map(|i| {
                    let raised: Vec<GrayImage> = m
                        .planes
                        .iter()
                        .map(|x| channel_shift(x, axis[i] as i32))
                        .collect();
                    or(&boundary(&raised), &residue_mask(&m.set1_residues[i]))
                })
                .collect();
            for pi in 0..n {
                for mi in 0..n {
                    let (mut tp, mut fp) = (0u32, 0u32);
                    for ((p, q), t) in by_pset[pi].iter().zip(&by_mset[mi]).zip(&m.truth) {
                        let found = p | q;
                        tp += (found & t).count_ones();
                        fp += (found & !t).count_ones();
                    }
                    let fp_rate = fp as f64 / m.negatives as f64;
                    let fn_rate = (m.positives - tp) as f64 / m.positives as f64;
                    let score = fp_rate.hypot(fn_rate);
                    if score < per_model[k].0 {
                        per_model[k] = (score, fp_rate, fn_rate, axis[pi], axis[mi], level);
                    }
                    let w = &mut worst[li][pi][mi];
                    w.0 = w.0.max(fp_rate);
                    w.1 = w.1.max(fn_rate);
                }
            }
        }
    }

    let mut scored = Vec::new();
    for li in 0..n {
        for pi in 0..n {
            for mi in 0..n {
                let (fp, fn_) = worst[li][pi][mi];
                scored.push((axis[pi], axis[mi], axis[li], fp, fn_));
            }
        }
    }
    scored.sort_by(|a, b| a.3.hypot(a.4).total_cmp(&b.3.hypot(b.4)));

    println!("model,pset,mset,level,fp,fn");
    for (k, b) in per_model.iter().enumerate() {
        println!("{k},{},{},{},{:.4},{:.4}", b.3, b.4, b.5, b.1, b.2);
    }
    let shown = if std::env::var_os("TUNE_ALL").is_some() {
        scored.len()
    } else {
        25
    };
    println!("pset,mset,level,worst_fp,worst_fn");
    for (p, m, l, fp, fn_) in scored.iter().take(shown) {
        println!("{p},{m},{l},{fp:.4},{fn_:.4}");
    }
}
