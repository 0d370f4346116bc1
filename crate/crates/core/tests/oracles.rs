mod common;

use common::*;
use impulse_denoise::detectors::{
    default_schedule, detect_dm1, detect_dm2, detect_dm3, detect_dm4, peer_group_size,
};
use impulse_denoise::image::{Window, WINDOW_LEN};
use impulse_denoise::vector::{amf, rank_weighted_scores, rwvmf, vmf, vmf_index, RankWeighting};
use impulse_denoise::{ColorImage, PeerStep, Pixel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(rng: &mut impl Rng, w: usize, h: usize, impulses: f64) -> ColorImage {
    let base = Pixel::new(rng.random(), rng.random(), rng.random());
    let pixels = (0..w * h)
        .map(|_| {
            if rng.random_bool(impulses) {
                Pixel::new(rng.random(), rng.random(), rng.random())
            } else {
                let mut j = |v: u8| v.saturating_add(rng.random_range(0..12));
                Pixel::new(j(base.r), j(base.g), j(base.b))
            }
        })
        .collect();
    ColorImage::new(w, h, pixels).unwrap()
}

fn window_at(img: &ColorImage, row: usize, col: usize) -> Vec<Pixel> {
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut out = vec![img.get(row, col)];
    for dr in -1..=1 {
        for dc in -1..=1 {
            if (dr, dc) != (0, 0) {
                out.push(img.get(
                    clamp(row as isize + dr, img.height()),
                    clamp(col as isize + dc, img.width()),
                ));
            }
        }
    }
    out
}

#[test]
fn vmf_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let values = random_window(&mut rng);
        let w = Window::from_values(values);
        let want = brute_vmf_index(&values);
        assert_eq!(vmf_index(&w), want, "{values:?}");
        assert_eq!(vmf(&w), values[want]);
    }
}

#[test]
fn rwvmf_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let weightings: [(RankWeighting, fn(usize) -> f64); 3] = [
        (RankWeighting::uniform(), |_| 1.0),
        (RankWeighting::reciprocal(), |r| 1.0 / r as f64),
        (RankWeighting::reciprocal_squared(), |r| {
            1.0 / (r * r) as f64
        }),
    ];
    for _ in 0..5_000 {
        let values = random_window(&mut rng);
        let w = Window::from_values(values);
        for (f, oracle) in &weightings {
            let want = values[brute_rwvmf_index(&values, oracle)];
            let got = rwvmf(&w, f);
            // Distinct pixels with equal real scores may round apart in a
            // different summation order; accept those as ties.
            if got != want {
                let s = rank_weighted_scores(&w, f).scores;
                let gi = values.iter().position(|&p| p == got).unwrap();
                let wi = values.iter().position(|&p| p == want).unwrap();
                assert!((s[gi] - s[wi]).abs() < 1e-9, "{f}: {values:?}");
            }
        }
    }
}

#[test]
fn amf_is_rounded_mean_of_clean_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..2_000 {
        let values = random_window(&mut rng);
        let clean: [bool; WINDOW_LEN] = std::array::from_fn(|_| rng.random_bool(0.6));
        let w = Window::from_values(values);
        let got = amf(&w, &clean);
        let members: Vec<Pixel> = values
            .iter()
            .zip(&clean)
            .filter(|(_, &c)| c)
            .map(|(p, _)| *p)
            .collect();
        if members.is_empty() {
            assert_eq!(got, vmf(&w));
            continue;
        }
        let mean = |f: fn(&Pixel) -> u8| {
            let s: u32 = members.iter().map(|p| f(p) as u32).sum();
            (s as f64 / members.len() as f64 + 0.5).floor() as u8
        };
        assert_eq!(got, Pixel::new(mean(|p| p.r), mean(|p| p.g), mean(|p| p.b)));
    }
}

fn brute_scores(values: &[Pixel], w: impl Fn(usize) -> f64) -> Vec<f64> {
    let d = |a: Pixel, b: Pixel| {
        let sq = |x: u8, y: u8| (x as f64 - y as f64).powi(2);
        (sq(a.r, b.r) + sq(a.g, b.g) + sq(a.b, b.b)).sqrt()
    };
    values
        .iter()
        .map(|&a| {
            let mut ds: Vec<f64> = values.iter().map(|&b| d(a, b)).collect();
            ds.sort_by(f64::total_cmp);
            ds.iter().enumerate().map(|(r, x)| w(r + 1) * x).sum()
        })
        .collect()
}

#[test]
fn dm1_dm2_statistics_match_window_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let img = random_image(&mut rng, 23, 17, 0.15);
    let f = RankWeighting::reciprocal();
    let alpha = 40.0;
    let dm1 = detect_dm1(&img, alpha, &f);
    let dm2 = detect_dm2(&img, alpha, &f);
    let (s1, s2) = (dm1.per_pixel_stat.unwrap(), dm2.per_pixel_stat.unwrap());
    for row in 0..img.height() {
        for col in 0..img.width() {
            let i = row * img.width() + col;
            let scores = brute_scores(&window_at(&img, row, col), |r| 1.0 / r as f64);
            let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            let (want1, want2) = (scores[0] - min, min);
            assert!((s1[i] - want1).abs() < 1e-9);
            assert!((s2[i] - want2).abs() < 1e-9);
            if (want1 - alpha).abs() > 1e-6 {
                assert_eq!(dm1.mask.get(row, col), want1 > alpha);
            }
            if (want2 - alpha).abs() > 1e-6 {
                assert_eq!(dm2.mask.get(row, col), want2 > alpha);
            }
        }
    }
}

#[test]
fn dm3_matches_peer_group_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let img = random_image(&mut rng, 19, 21, 0.2);
    let norm = 255.0 * 3f64.sqrt();
    for (d, k) in [(0.1, 2), (0.25, 3), (0.05, 0), (0.5, 8)] {
        let out = detect_dm3(&img, PeerStep::new(d, k));
        for row in 0..img.height() {
            for col in 0..img.width() {
                let w = window_at(&img, row, col);
                let m = w[1..]
                    .iter()
                    .filter(|&&p| {
                        let sq = |x: u8, y: u8| (x as f64 - y as f64).powi(2);
                        let c = w[0];
                        (sq(p.r, c.r) + sq(p.g, c.g) + sq(p.b, c.b)).sqrt() / norm < d
                    })
                    .count();
                let values: [Pixel; WINDOW_LEN] = w.clone().try_into().unwrap();
                assert_eq!(peer_group_size(&Window::from_values(values), 0, d), m);
                assert_eq!(
                    out.mask.get(row, col),
                    m <= k as usize,
                    "d={d} k={k} at {row},{col}"
                );
            }
        }
    }
}

#[test]
fn dm4_contains_its_first_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..5 {
        let img = random_image(&mut rng, 24, 24, 0.25);
        let sched = default_schedule();
        let first = detect_dm3(&img, sched[0]).mask;
        let all = detect_dm4(&img, &sched).unwrap().mask;
        assert!(subset(&first, &all));
    }
}

fn arb_image() -> impl Strategy<Value = ColorImage> {
    (3usize..9, 3usize..9).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<[u8; 3]>(), w * h).prop_map(move |v| {
            ColorImage::new(w, h, v.into_iter().map(Pixel::from).collect()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dm1_dm2_monotone_in_alpha(img in arb_image(), a in 0.0f64..400.0, b in 0.0f64..400.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let f = RankWeighting::reciprocal();
        prop_assert!(subset(&detect_dm1(&img, hi, &f).mask, &detect_dm1(&img, lo, &f).mask));
        prop_assert!(subset(&detect_dm2(&img, hi, &f).mask, &detect_dm2(&img, lo, &f).mask));
    }

    #[test]
    fn dm3_monotone_in_k_and_d(img in arb_image(), d in 0.0f64..1.0, e in 0.0f64..1.0, k in 0u8..8) {
        let (dlo, dhi) = (d.min(e), d.max(e));
        let base = detect_dm3(&img, PeerStep::new(dlo, k)).mask;
        prop_assert!(subset(&base, &detect_dm3(&img, PeerStep::new(dlo, k + 1)).mask));
        prop_assert!(subset(&detect_dm3(&img, PeerStep::new(dhi, k)).mask, &base));
    }
}
