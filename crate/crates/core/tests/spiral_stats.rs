//! Distributional checks of the planar spiral simulation.

use chaintrace::bd::derive_seed;
use chaintrace::spiral::*;
use rayon::prelude::*;

#[test]
fn sphere_process_at_change_times_is_a_q_walk() {
    // conditional on a radial move at level k, the up-probability is exactly
    // Q(k, k+1); pool transitions per level band and compare within 3 SE
    let q = radial_weights();
    let covs: Vec<EdgeCoverage> = (0..60u64)
        .into_par_iter()
        .map(|r| {
            let cfg = SpiralConfig::new(Variant::Kozma, 24, 1 << 30, derive_seed(7_700, r));
            simulate(&cfg)
        })
        .collect();
    for (lo, hi) in [(1u64, 4u64), (4, 12), (12, 24)] {
        let mut ups = 0.0;
        let mut expected = 0.0;
        let mut variance = 0.0;
        let mut total = 0u64;
        for cov in &covs {
            for k in lo..hi {
                let u = cov.up_transitions[k as usize];
                let d = cov.down_transitions[k as usize - 1];
                // moves leaving level k radially: up from S(k), plus the
                // down-moves recorded as S(k) -> S(k-1)
                let n = u + d;
                let p = q.up_prob(k);
                ups += u as f64;
                expected += n as f64 * p;
                variance += n as f64 * p * (1.0 - p);
                total += n;
            }
        }
        assert!(total > 2_000, "band [{lo},{hi}): only {total} radial moves");
        let z = (ups - expected) / variance.sqrt();
        assert!(
            z.abs() <= 3.0,
            "band [{lo},{hi}): z = {z:.2} over {total} transitions"
        );
    }
}

#[test]
fn down_transitions_scale_with_g2() {
    // per-run S(k+1) -> S(k) counts stay above a calibrated multiple of
    // g_2(k) for all k up to the window, in a stable fraction of runs; the
    // doubled batch doubles window and radius together
    let runs = 100u64;
    let count_frac = |window: u64, radius: u32, seed: u64| -> f64 {
        let hits: u64 = (0..runs)
            .into_par_iter()
            .map(|r| {
                let cfg = SpiralConfig::new(Variant::Kozma, radius, 1 << 32, derive_seed(seed, r));
                let cov = simulate(&cfg);
                let ok = (1..=window).all(|k| {
                    cov.down_transitions[k as usize] as f64
                        >= 0.05 * chaintrace::bd::g(2, k)
                });
                u64::from(ok && !cov.exhausted)
            })
            .sum();
        hits as f64 / runs as f64
    };
    let f1 = count_frac(16, 32, 8_800);
    let f2 = count_frac(32, 64, 8_900);
    assert!(f1 > 0.05, "fraction at radius 32: {f1}");
    let se = ((f1 * (1.0 - f1) + f2 * (1.0 - f2)) / runs as f64).sqrt();
    assert!((f1 - f2).abs() <= 2.0 * se.max(0.02), "{f1} vs {f2} (se {se})");
}

#[test]
fn coverage_reports_track_the_horizon() {
    // longer runs leave fewer uncovered edges in a fixed box, and nested
    // boxes have non-decreasing uncovered counts
    let uncovered_at = |radius: u32, seed_base: u64| -> f64 {
        let covs: Vec<EdgeCoverage> = (0..40u64)
            .into_par_iter()
            .map(|r| {
                let cfg =
                    SpiralConfig::new(Variant::Kozma, radius, 1 << 31, derive_seed(seed_base, r));
                simulate(&cfg)
            })
            .collect();
        covs.iter()
            .map(|c| coverage_report(c, 4).uncovered.len() as f64)
            .sum::<f64>()
            / covs.len() as f64
    };
    let short = uncovered_at(8, 9_900);
    let long = uncovered_at(64, 9_900);
    assert!(
        long < short,
        "mean uncovered in box 4 should drop with the horizon: {short} -> {long}"
    );

    let cfg = SpiralConfig::new(Variant::Kozma, 32, 1 << 31, 123);
    let cov = simulate(&cfg);
    let mut prev = 0;
    for b in [2u32, 4, 8, 16] {
        let n = coverage_report(&cov, b).uncovered.len();
        assert!(n >= prev);
        prev = n;
    }

    // bounded-below variant runs and reports as well
    let cfg = SpiralConfig::new(Variant::BoundedBelow, 16, 1 << 31, 123);
    let cov = simulate(&cfg);
    assert!(!cov.exhausted);
    let rep = coverage_report(&cov, 4);
    assert!(rep.annulus_min.len() == 5);
}
