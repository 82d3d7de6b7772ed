//! Traces of simulations (PATH, N), recurrence diagnostics via resistance
//! growth, and the expected-crossings network profiles.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bd::CrossingLedger;
use crate::chain::{BoundaryMode, FiniteChain, Measure};
use crate::error::{Error, Result};
use crate::instances::ChainFamily;
use crate::network::Network;
use crate::potential;
use crate::spiral::EdgeCoverage;
use crate::state::StateId;

/// The visited subgraph with crossing-count edge weights.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub network: Network,
    pub origin: StateId,
    pub seed: u64,
    pub steps: u64,
}

/// BD ledgers map to line networks.
pub fn record_bd_trace(ledger: &CrossingLedger) -> Result<TraceRecord> {
    if ledger.steps == 0 {
        return Err(Error::EmptyTarget);
    }
    let top = ledger.max_level();
    let vertices: Vec<StateId> = (0..=top).map(|i| StateId::Int(i as i64)).collect();
    let mut net = Network::new(vertices);
    for i in 0..top {
        let n = ledger.crossings(i);
        if n == 0 {
            return Err(Error::Config(format!(
                "ledger edge ({i},{}) has zero crossings below the max level",
                i + 1
            )));
        }
        net.add_edge_weight(i as usize, i as usize + 1, n as f64);
    }
    Ok(TraceRecord {
        network: net,
        origin: StateId::Int(0),
        seed: ledger.seed(),
        steps: ledger.steps,
    })
}

/// Spiral coverage ledgers map to lattice subgraphs.
pub fn record_spiral_trace(cov: &EdgeCoverage) -> Result<TraceRecord> {
    if cov.steps == 0 {
        return Err(Error::EmptyTarget);
    }
    let mut vertices: Vec<StateId> = Vec::new();
    let mut edges: Vec<(StateId, StateId, f64)> = Vec::new();
    for (a, b) in EdgeCoverage::box_edges(cov.max_radius) {
        let c = cov.crossings(a, b);
        if c > 0 {
            let (u, v) = (StateId::Pair(a.0, a.1), StateId::Pair(b.0, b.1));
            vertices.push(u);
            vertices.push(v);
            edges.push((u, v, c as f64));
        }
    }
    vertices.sort_unstable();
    vertices.dedup();
    let mut net = Network::new(vertices);
    for (u, v, w) in edges {
        let x = net.index_of(u).unwrap();
        let y = net.index_of(v).unwrap();
        net.add_edge_weight(x, y, w);
    }
    Ok(TraceRecord {
        network: net,
        origin: StateId::Pair(0, 0),
        seed: cov.seed,
        steps: cov.steps,
    })
}

/// Partial sums Σ_{i<n} 1/N(i,i+1) of a line ledger: exactly the trace
/// resistance for BD chains.
pub fn harmonic_crossing_sum(ledger: &CrossingLedger, n: u64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n as usize);
    let mut acc = 0.0;
    for i in 0..n {
        let c = ledger.crossings(i);
        if c == 0 {
            return Err(Error::Config(format!(
                "zero crossing count at edge ({i},{}) below n = {n}",
                i + 1
            )));
        }
        acc += 1.0 / c as f64;
        out.push(acc);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Diverging,
    Inconclusive,
}

/// Resistance sequences o ↔ ∂B_R on (PATH, N) and (PATH, 1).
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceProfile {
    pub radii: Vec<u64>,
    pub resistance_n: Vec<f64>,
    pub resistance_unit: Vec<f64>,
    pub verdict: Verdict,
}

impl RecurrenceProfile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "R,resistance_N,resistance_unit")?;
        for i in 0..self.radii.len() {
            writeln!(
                w,
                "{},{},{}",
                self.radii[i], self.resistance_n[i], self.resistance_unit[i]
            )?;
        }
        Ok(())
    }
}

/// Divergence heuristic: positive slope across the top quartile of radii,
/// threshold 1e-3 per octave; infinite resistance is trivially diverging.
fn classify_profile(radii: &[u64], res: &[f64]) -> Verdict {
    if res.iter().any(|r| r.is_infinite()) {
        return Verdict::Diverging;
    }
    let n = res.len();
    if n < 2 {
        return Verdict::Inconclusive;
    }
    let start = (3 * n) / 4;
    let start = if start + 1 >= n { n - 2 } else { start };
    let octaves = (radii[n - 1] as f64 / radii[start] as f64).log2();
    if octaves <= 0.0 {
        return Verdict::Inconclusive;
    }
    let slope = (res[n - 1] - res[start]) / octaves;
    if slope > 1e-3 {
        Verdict::Diverging
    } else {
        Verdict::Inconclusive
    }
}

pub fn trace_resistance_profile(trace: &TraceRecord, radii: &[u64]) -> Result<RecurrenceProfile> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("radii must be strictly increasing".into()));
    }
    let net = &trace.network;
    let o = net
        .index_of(trace.origin)
        .ok_or(Error::UnknownState(trace.origin))?;
    let mut in_a = vec![false; net.len()];
    in_a[o] = true;
    let mut unit = Network::new(net.vertices().to_vec());
    for (x, y, _) in net.edges() {
        unit.add_edge_weight(x, y, 1.0);
    }
    let mut resistance_n = Vec::with_capacity(radii.len());
    let mut resistance_unit = Vec::with_capacity(radii.len());
    for &r in radii {
        resistance_n.push(potential::resistance_to_sphere(net, &in_a, r)?);
        resistance_unit.push(potential::resistance_to_sphere(&unit, &in_a, r)?);
    }
    let verdict = classify_profile(radii, &resistance_n);
    Ok(RecurrenceProfile { radii: radii.to_vec(), resistance_n, resistance_unit, verdict })
}

/// Resistance profile of (G(X), E_o[N]) from exact Green solves on the
/// killed truncation at the largest radius. Abstains when the truncated
/// capacity of the origin keeps shrinking (no transience evidence).
pub fn expected_network_profile(
    family: &ChainFamily,
    radii: &[u64],
) -> Result<RecurrenceProfile> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("radii must be non-empty, strictly increasing".into()));
    }
    let rmax = *radii.last().unwrap();
    let probe = (rmax / 4).max(1);
    let caps = potential::capacity_profile(family, &[family.origin()], &[probe, rmax])?;
    let (head, tail) = (caps.values[0], caps.values[1]);
    if tail < 0.6 * head {
        return Err(Error::NonTransient { head, tail });
    }
    let chain = family.truncate(rmax, BoundaryMode::Killed)?;
    let ec = potential::expected_crossings(&chain, family.pi_of(family.origin()))?;
    let o = ec
        .network
        .index_of(family.origin())
        .ok_or(Error::UnknownState(family.origin()))?;
    let mut in_a = vec![false; ec.network.len()];
    in_a[o] = true;
    let mut unit = Network::new(ec.network.vertices().to_vec());
    for (x, y, _) in ec.network.edges() {
        unit.add_edge_weight(x, y, 1.0);
    }
    let mut resistance_n = Vec::with_capacity(radii.len());
    let mut resistance_unit = Vec::with_capacity(radii.len());
    for &r in radii {
        resistance_n.push(potential::resistance_to_sphere(&ec.network, &in_a, r)?);
        resistance_unit.push(potential::resistance_to_sphere(&unit, &in_a, r)?);
    }
    let verdict = classify_profile(radii, &resistance_n);
    Ok(RecurrenceProfile { radii: radii.to_vec(), resistance_n, resistance_unit, verdict })
}

/// One sampled trace of a finite killed chain: the visited network with
/// crossing counts, the kill step contributing one ghost crossing.
pub fn sample_chain_trace(chain: &FiniteChain, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edge_counts: std::collections::HashMap<(usize, usize), u64> =
        std::collections::HashMap::new();
    let mut ghost_counts: std::collections::HashMap<usize, u64> = std::collections::HashMap::new();
    let mut x = chain.origin();
    loop {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next: Option<usize> = None;
        for &(y, p) in chain.row(x) {
            acc += p;
            if r < acc {
                next = Some(y);
                break;
            }
        }
        match next {
            Some(y) => {
                let key = (x.min(y), x.max(y));
                *edge_counts.entry(key).or_insert(0) += 1;
                x = y;
            }
            None => {
                // killed
                *ghost_counts.entry(x).or_insert(0) += 1;
                break;
            }
        }
    }
    let mut net = Network::new(chain.states().to_vec());
    for ((a, b), c) in edge_counts {
        net.add_edge_weight(a, b, c as f64);
    }
    for (v, c) in ghost_counts {
        net.add_ghost_weight(v, c as f64);
    }
    net
}

/// Monte-Carlo check of the capacity concavity: sample mean of Cap(A; N)
/// against Cap(A; E_o[N]), with the standard error of the mean.
#[derive(Debug, Clone, Serialize)]
pub struct ConcavityRecord {
    pub runs: u64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub expected_side: f64,
}

pub fn concavity_check(
    chain: &FiniteChain,
    pi: &Measure,
    a_states: &[StateId],
    runs: u64,
    seed: u64,
) -> Result<ConcavityRecord> {
    if a_states.is_empty() {
        return Ok(ConcavityRecord { runs, mc_mean: 0.0, mc_se: 0.0, expected_side: 0.0 });
    }
    let idx: Vec<usize> = a_states
        .iter()
        .map(|s| chain.require_index(*s))
        .collect::<Result<_>>()?;
    let caps: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let net = sample_chain_trace(chain, crate::bd::derive_seed(seed, run));
            let mut in_a = vec![false; net.len()];
            for &i in &idx {
                in_a[i] = true;
            }
            // A may be unvisited except the origin; capacity of the visited
            // part only (absent vertices carry no edges)
            potential::network_capacity(&net, &in_a).unwrap_or(0.0)
        })
        .collect();
    let mean = caps.iter().sum::<f64>() / runs as f64;
    let var = caps.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / runs as f64;
    let se = (var / runs as f64).sqrt();

    let ec = potential::expected_crossings(chain, pi.get(chain.origin()))?;
    let mut in_a = vec![false; ec.network.len()];
    for &i in &idx {
        in_a[i] = true;
    }
    let expected_side = potential::network_capacity(&ec.network, &in_a)?;
    Ok(ConcavityRecord { runs, mc_mean: mean, mc_se: se, expected_side })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bd::{simulate, BdWeights, StopRule};
    use crate::instances::{killed_bd_exact_tail, standard_families, two_pow_family};

    #[test]
    fn record_trace_single_step() {
        let mut ledger = CrossingLedger {
            weights_tag: "test".into(),
            seeds: vec![0],
            up: vec![1],
            down: vec![0],
            visits: vec![1, 1],
            steps: 1,
            final_level: 1,
            exhausted: false,
        };
        ledger.check_consistency().unwrap();
        let trace = record_bd_trace(&ledger).unwrap();
        assert_eq!(trace.network.len(), 2);
        assert_eq!(trace.network.weight(0, 1), 1.0);
        ledger.steps = 0;
        assert!(record_bd_trace(&ledger).is_err());
    }

    #[test]
    fn harmonic_sums_closed_forms() {
        let synth = CrossingLedger {
            weights_tag: "synthetic".into(),
            seeds: vec![0],
            up: (1..=8u64).collect(),
            down: vec![0; 8],
            visits: vec![1; 9],
            steps: 36,
            final_level: 8,
            exhausted: false,
        };
        // N(i,i+1) = i+1: partial sums are harmonic numbers
        let sums = harmonic_crossing_sum(&synth, 8).unwrap();
        let mut h = 0.0;
        for i in 0..8 {
            h += 1.0 / (i as f64 + 1.0);
            assert!((sums[i] - h).abs() < 1e-14);
        }
        let ones = CrossingLedger {
            weights_tag: "ones".into(),
            seeds: vec![0],
            up: vec![1; 10],
            down: vec![0; 10],
            visits: vec![1; 11],
            steps: 10,
            final_level: 10,
            exhausted: false,
        };
        let sums1 = harmonic_crossing_sum(&ones, 10).unwrap();
        assert!((sums1[9] - 10.0).abs() < 1e-14);
    }

    #[test]
    fn bd_trace_profile_equals_harmonic_sums() {
        let w = BdWeights::geometric(2.0);
        let ledger = simulate(&w, StopRule::Level(256), 100_000_000, 9);
        let trace = record_bd_trace(&ledger).unwrap();
        let radii: Vec<u64> = vec![16, 32, 64, 128, 256];
        let profile = trace_resistance_profile(&trace, &radii).unwrap();
        let sums = harmonic_crossing_sum(&ledger, 256).unwrap();
        for (ri, &r) in radii.iter().enumerate() {
            let expect = sums[(r - 1) as usize];
            assert!(
                (profile.resistance_n[ri] - expect).abs() <= 1e-12 * expect.max(1.0),
                "r={r}: {} vs {expect}",
                profile.resistance_n[ri]
            );
        }
        // Rayleigh comparison: unit resistance >= N-resistance / max N
        let max_n = (0..256).map(|i| ledger.crossings(i)).max().unwrap() as f64;
        for i in 0..radii.len() {
            assert!(profile.resistance_unit[i] >= profile.resistance_n[i] / max_n - 1e-12);
        }
    }

    #[test]
    fn profile_monotone_in_radius() {
        let w = BdWeights::geometric(2.0);
        let ledger = simulate(&w, StopRule::Level(128), 100_000_000, 21);
        let trace = record_bd_trace(&ledger).unwrap();
        let profile = trace_resistance_profile(&trace, &[8, 16, 32, 64, 128]).unwrap();
        for w in profile.resistance_n.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn expected_profile_two_pow_strictly_increasing() {
        let fam = two_pow_family();
        let radii: Vec<u64> = (3..=9).map(|j| 1u64 << j).collect();
        let profile = expected_network_profile(&fam, &radii).unwrap();
        for w in profile.resistance_n.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(profile.verdict, Verdict::Diverging);
    }

    #[test]
    fn expected_profile_abstains_on_recurrent_input() {
        let fam = crate::instances::biased_z_family(0.5); // SRW on Z
        let err = expected_network_profile(&fam, &[16, 64, 256]).unwrap_err();
        assert!(matches!(err, Error::NonTransient { .. }));
    }

    #[test]
    fn expected_profile_biased_walk_increases() {
        let fam = crate::instances::biased_z_family(2.0 / 3.0);
        let radii: Vec<u64> = (3..=10).map(|j| 1u64 << j).collect();
        let profile = expected_network_profile(&fam, &radii).unwrap();
        for w in profile.resistance_n.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn concavity_deterministic_chain_equality() {
        // deterministic cycle into the cemetery: N is non-random
        let states: Vec<StateId> = (0..4).map(StateId::Int).collect();
        let rows = vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0)], vec![]];
        let chain = FiniteChain::from_rows(
            states,
            rows,
            vec![0.0, 0.0, 0.0, 1.0],
            StateId::Int(0),
            BoundaryMode::Killed,
        )
        .unwrap();
        let pi = Measure::new(vec![1.0; 4]).unwrap();
        let rec = concavity_check(&chain, &pi, &[StateId::Int(0)], 64, 3).unwrap();
        assert!(rec.mc_se < 1e-12);
        assert!((rec.mc_mean - rec.expected_side).abs() < 1e-10);
    }

    #[test]
    fn concavity_empty_target_is_zero() {
        let (chain, pi) = killed_bd_exact_tail(&BdWeights::geometric(2.0), 8).unwrap();
        let rec = concavity_check(&chain, &pi, &[], 10, 1).unwrap();
        assert_eq!(rec.mc_mean, 0.0);
        assert_eq!(rec.expected_side, 0.0);
    }

    #[test]
    fn theorem_one_desk_scale_on_standard_instances() {
        // profile at 2^12 >= 4x profile at 2^6 (exact expected networks)
        for fam in standard_families() {
            let radii: Vec<u64> = (4..=12).map(|j| 1u64 << j).collect();
            let profile = expected_network_profile(&fam, &radii).unwrap();
            let at = |r: u64| {
                profile.resistance_n[radii.iter().position(|&x| x == r).unwrap()]
            };
            assert!(
                at(1 << 12) >= 4.0 * at(1 << 6),
                "{}: {} vs {}",
                fam.name,
                at(1 << 12),
                at(1 << 6)
            );
        }
    }
}
