//! Recomputes the pilot statistics behind the frozen constants in the
//! acceptance suite (min-ratio fractions, coverage fractions, scale-doubled
//! event stability). Run with --release.

use chaintrace::bd::{self, BdWeights, StopRule};
use chaintrace::spiral::{self, SpiralConfig, Variant};
use rayon::prelude::*;
use std::time::Instant;

/// Fraction of `runs` (to level `horizon`) with min_{1<=k<=window} N(k,k+1)/k >= c.
fn min_ratio_fraction(w: &BdWeights, window: u64, horizon: u64, c: f64, runs: u64, seed: u64) -> f64 {
    let hits: u64 = (0..runs)
        .into_par_iter()
        .map(|r| {
            let ledger = bd::simulate(w, StopRule::Level(horizon), 1 << 34, bd::derive_seed(seed, r));
            let min = (1..=window)
                .map(|k| ledger.crossings(k) as f64 / k as f64)
                .fold(f64::INFINITY, f64::min);
            u64::from(min >= c)
        })
        .sum();
    hits as f64 / runs as f64
}

fn all_crossed_fraction(w: &BdWeights, window: u64, horizon: u64, m: u64, runs: u64, seed: u64) -> f64 {
    let hits: u64 = (0..runs)
        .into_par_iter()
        .map(|r| {
            let ledger = bd::simulate(w, StopRule::Level(horizon), 1 << 34, bd::derive_seed(seed, r));
            u64::from((0..window).all(|k| ledger.crossings(k) >= m))
        })
        .sum();
    hits as f64 / runs as f64
}

fn main() {
    let t0 = Instant::now();

    println!("== kozma s=0 scaled event: min over k<=W of N/k at T_2W ==");
    let w0 = BdWeights::kozma(0);
    for c in [0.05, 0.10, 0.13, 0.16, 0.20] {
        let t = Instant::now();
        let f1 = min_ratio_fraction(&w0, 1 << 10, 1 << 11, c, 1000, 7001);
        let f2 = min_ratio_fraction(&w0, 1 << 11, 1 << 12, c, 1000, 7002);
        println!("c={c}: W=2^10 {f1:.3} | W=2^11 {f2:.3} ({:?})", t.elapsed());
    }

    println!("== jlp scaled event: all edges below W crossed >= 3 at T_2W ==");
    let jlp = BdWeights::jlp();
    let t = Instant::now();
    let f1 = all_crossed_fraction(&jlp, 1 << 10, 1 << 11, 3, 1000, 8001);
    let f2 = all_crossed_fraction(&jlp, 1 << 11, 1 << 12, 3, 1000, 8002);
    println!("W=2^10 {f1:.3} | W=2^11 {f2:.3} ({:?})", t.elapsed());

    println!("== cor s=1 scaled event: N(k) >= 2 ceil(sqrt k)+1 below W at T_2W ==");
    let cor: Vec<f64> = (1..=(1u64 << 13))
        .map(|k| bd::g(1, k) * bd::iterated_log(2, k).powi(2))
        .collect();
    let cor = BdWeights::custom(cor).unwrap();
    for (window, horizon, seed) in [(1u64 << 10, 1u64 << 11, 10_001), (1 << 11, 1 << 12, 10_002)] {
        let hits: u64 = (0..300u64)
            .into_par_iter()
            .map(|r| {
                let ledger = bd::simulate(&cor, StopRule::Level(horizon), 1 << 34, bd::derive_seed(seed, r));
                u64::from((1..=window).all(|k| {
                    ledger.crossings(k) >= 2 * (k as f64).sqrt().ceil() as u64 + 1
                }))
            })
            .sum();
        println!("W={window}: fraction {}", hits as f64 / 300.0);
    }

    println!("== spiral: literal box-16 edge coverage at radius 64/128 ==");
    for (max_r, seed) in [(64u32, 12_001u64), (128, 12_002)] {
        let t = Instant::now();
        let full: u64 = (0..200u64)
            .into_par_iter()
            .map(|r| {
                let cfg = SpiralConfig::new(Variant::Kozma, max_r, 1 << 34, bd::derive_seed(seed, r));
                let cov = spiral::simulate(&cfg);
                let rep = spiral::coverage_report(&cov, 16);
                u64::from(rep.uncovered.is_empty() && !cov.exhausted)
            })
            .sum();
        println!("radius {max_r}: full-coverage runs {full}/200 ({:?})", t.elapsed());
    }

    println!("== spiral: per-box coverage + vertex-visit fractions at radius 64 ==");
    let covs: Vec<spiral::EdgeCoverage> = (0..200u64)
        .into_par_iter()
        .map(|r| {
            let cfg = SpiralConfig::new(Variant::Kozma, 64, 1 << 34, bd::derive_seed(12_003, r));
            spiral::simulate(&cfg)
        })
        .collect();
    for b in [2u32, 3, 4, 6, 8, 16] {
        let full = covs
            .iter()
            .filter(|c| spiral::coverage_report(c, b).uncovered.is_empty())
            .count();
        println!("  box {b}: full edge coverage {full}/200");
    }

    println!("== spiral: Q-transition z-scores per band at radius 64 ==");
    let q = spiral::radial_weights();
    for (lo, hi) in [(1u64, 4u64), (4, 16), (16, 64)] {
        let mut ups = 0.0;
        let mut expected = 0.0;
        let mut variance = 0.0;
        let mut total = 0u64;
        for cov in &covs {
            for k in lo..hi {
                let u = cov.up_transitions[k as usize];
                let d = cov.down_transitions[k as usize - 1];
                let n = u + d;
                let p = q.up_prob(k);
                ups += u as f64;
                expected += n as f64 * p;
                variance += n as f64 * p * (1.0 - p);
                total += n;
            }
        }
        println!(
            "  band [{lo},{hi}): n={total} z={:.3}",
            (ups - expected) / variance.sqrt()
        );
    }

    println!("== spiral: down-transition minima vs g_2(k), k <= 16 ==");
    let mut ratios: Vec<f64> = covs
        .iter()
        .map(|cov| {
            (1..=16u64)
                .map(|k| cov.down_transitions[k as usize] as f64 / bd::g(2, k))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "  min-ratio quantiles: q10={:.3} q25={:.3} q50={:.3} q75={:.3}",
        ratios[20], ratios[50], ratios[100], ratios[150]
    );

    println!("total {:?}", t0.elapsed());
}
