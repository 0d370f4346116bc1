//! ROC selection of per-noise-model presets for the morphological detector.
//!
//! Usage: `cargo run --release --example tune_presets -- IMAGE [STEP]`
//!
//! For each random-valued model (CI2, CI3, CT2, CT3) at p = 0.1 the grid over
//! both `set2` readings is swept and the Euclidean-closest point to (0, 0) is
//! reported together with the PSNR the switching filter reaches with it.

use impulse_denoise::detectors::{MorphParams, Set2Reading};
use impulse_denoise::eval::SelectionRule;
use impulse_denoise::io::read_color;
use impulse_denoise::{
    corrupt, denoise, mse_psnr, roc_sweep, DetectorConfig, ImpulseValues, NoiseFamily, NoiseSpec,
    SwitchingConfig,
};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().expect("usage: tune_presets IMAGE [STEP]");
    let step: usize = args.next().map_or(32, |s| s.parse().expect("STEP"));
    let clean = read_color(&path).expect("readable image");

    let mut grid = Vec::new();
    for set2 in [Set2Reading::Shift, Set2Reading::Complement] {
        for p in (0..=255).step_by(step) {
            for m in (0..=255).step_by(step) {
                for l in (0..=255).step_by(step) {
                    let mut mp = MorphParams::new(p as u8, m as u8, l as u8);
                    mp.set2 = set2;
                    grid.push(DetectorConfig::Dm5(mp));
                }
            }
        }
    }

    println!("model,params,fp_rate,fn_rate,psnr_noisy,psnr_restored");
    for family in [NoiseFamily::Ci, NoiseFamily::Ct] {
        for values in [ImpulseValues::Uniform, ImpulseValues::Tails] {
            let spec = NoiseSpec::new(family, values, 0.1, 7).unwrap();
            let sweep = roc_sweep(&clean, &spec, &grid, SelectionRule::Euclidean).unwrap();
            let cfg = grid[sweep.selected].clone();
            let noisy = corrupt(&clean, &spec).unwrap().noisy;
            let restored = denoise(&noisy, &SwitchingConfig::new(cfg.clone()))
                .unwrap()
                .0;
            let best = sweep.best();
            println!(
                "{},\"{}\",{:.4},{:.4},{:.2},{:.2}",
                spec.label(),
                cfg.params_string(),
                best.fp_rate,
                best.fn_rate,
                mse_psnr(&clean, &noisy).unwrap().1,
                mse_psnr(&clean, &restored).unwrap().1,
            );
        }
    }
}
