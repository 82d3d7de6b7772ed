//! Capacity identities and variational cross-checks on random instances.

use chaintrace::bd::BdWeights;
use chaintrace::chain::{
    additive_symmetrization, stationary_measure, time_reversal, truncate, BoundaryMode,
    FiniteChain, Measure,
};
use chaintrace::instances::*;
use chaintrace::potential::*;
use chaintrace::trace::concavity_check;
use chaintrace::StateId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_disjoint_sets(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<usize>) {
    loop {
        let a: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.25)).collect();
        let b: Vec<usize> = (0..n)
            .filter(|x| !a.contains(x))
            .filter(|_| rng.gen_bool(0.25))
            .collect();
        if !a.is_empty() && !b.is_empty() && a.len() + b.len() < n {
            return (a, b);
        }
    }
}

#[test]
fn cap2_symmetry_and_reversal_on_random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..50 {
        let n = rng.gen_range(5..=10);
        let chain = random_irreducible_chain(&mut rng, n);
        let pi = stationary_measure(&chain).unwrap();
        let rev = time_reversal(&chain, &pi).unwrap();
        let (a, b) = random_disjoint_sets(&mut rng, n);
        let ab = capacity_between(&chain, &pi, &a, &b).unwrap();
        let ba = capacity_between(&chain, &pi, &b, &a).unwrap();
        let ab_star = capacity_between(&rev, &pi, &a, &b).unwrap();
        assert!((ab - ba).abs() < 1e-10, "Cap(A,B)={ab} Cap(B,A)={ba}");
        assert!((ab - ab_star).abs() < 1e-10, "Cap(A,B)={ab} Cap_*(A,B)={ab_star}");
    }
}

#[test]
fn cap5_symmetrization_never_exceeds_and_is_sometimes_strict() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut strict = false;
    for _ in 0..50 {
        let n = rng.gen_range(5..=10);
        let chain = random_irreducible_chain(&mut rng, n);
        let pi = stationary_measure(&chain).unwrap();
        let cs = additive_symmetrization(&chain, &pi).unwrap();
        let (a, b) = random_disjoint_sets(&mut rng, n);
        let cap = capacity_between(&chain, &pi, &a, &b).unwrap();
        let mut in_a = vec![false; n];
        let mut in_b = vec![false; n];
        for &x in &a {
            in_a[x] = true;
        }
        for &x in &b {
            in_b[x] = true;
        }
        let cap_s = network_capacity_between(&cs, &in_a, &in_b).unwrap();
        assert!(cap_s <= cap + 1e-10, "Cap_s={cap_s} > Cap={cap}");
        if cap_s < cap - 1e-3 {
            strict = true;
        }
    }
    assert!(strict, "no strict Cap_s < Cap instance found");
}

#[test]
fn cap3_monotone_in_the_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..50 {
        let n = rng.gen_range(6..=16);
        let (chain, pi) = random_killed_chain(&mut rng, n);
        let mut a: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.2)).collect();
        if a.is_empty() {
            a.push(rng.gen_range(0..n));
        }
        let mut a_big = a.clone();
        loop {
            let extra = rng.gen_range(0..n);
            if !a_big.contains(&extra) {
                a_big.push(extra);
                break;
            }
            if a_big.len() == n {
                break;
            }
        }
        let small = capacity_set(&chain, &pi, &a).unwrap();
        let big = capacity_set(&chain, &pi, &a_big).unwrap();
        assert!(small <= big + 1e-12, "Cap(A)={small} > Cap(A')={big}");
    }
}

#[test]
fn capacity_profile_monotone_nonincreasing() {
    for fam in standard_families() {
        let est = capacity_profile(&fam, &[fam.origin()], &[8, 16, 32, 64, 128, 256]).unwrap();
        assert!(
            est.monotonicity_violation() <= 1e-12,
            "{}: {:?}",
            fam.name,
            est.values
        );
    }
}

#[test]
fn oracle_equivalence_probabilistic_vs_variational() {
    // Dirichlet principle against the escape-probability route on random
    // reversible killed networks
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..60 {
        let n = rng.gen_range(4..=20);
        let net = random_reversible_network(&mut rng, n);
        let mut in_a = vec![false; n];
        let picks = rng.gen_range(1..=2.min(n));
        for _ in 0..picks {
            in_a[rng.gen_range(0..n)] = true;
        }
        let idx: Vec<usize> = (0..n).filter(|&x| in_a[x]).collect();
        // probabilistic: π(v) = c_v, escape probability from the walk chain
        let chain = net.walk_chain(net.vertex(idx[0])).unwrap();
        let pi = Measure::from_fn(&chain, |s| {
            net.vertex_weight(net.index_of(s).unwrap())
        })
        .unwrap();
        let prob = capacity_set(&chain, &pi, &idx).unwrap();
        let vari = min_energy_capacity(&net, &in_a, None).unwrap();
        let scale = prob.abs().max(1e-9);
        assert!(
            ((prob - vari) / scale).abs() < 1e-8,
            "probabilistic {prob} vs variational {vari}"
        );
    }
}

#[test]
fn dirichlet_energy_of_voltage_bounded_by_capacity() {
    // E_S(v_A, v_A) <= Cap(A) on killed chains (equality at finite volume)
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..40 {
        let n = rng.gen_range(6..=24);
        let (chain, pi) = random_killed_chain(&mut rng, n);
        let mut a: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.15)).collect();
        if a.is_empty() {
            a.push(rng.gen_range(0..n));
        }
        let v = hitting_voltage(&chain, &a, 0.0).unwrap();
        let cs = additive_symmetrization(&chain, &pi).unwrap();
        let energy = dirichlet_energy(&cs, &v);
        let cap = capacity_set(&chain, &pi, &a).unwrap();
        assert!(
            energy <= cap + 1e-9 * cap.max(1.0),
            "E_S(v)={energy} > Cap(A)={cap}"
        );
    }
}

#[test]
fn green_identity_on_random_killed_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..40 {
        let n = rng.gen_range(5..=30);
        let (chain, pi) = random_killed_chain(&mut rng, n);
        let table = green_table(&chain, pi.get(chain.origin())).unwrap();
        assert!(table.g[chain.origin()] >= 1.0 - 1e-12);
        let dev = green_identity_deviation(&chain, &pi, &table).unwrap();
        assert!(dev < 1e-10, "green identity deviation {dev}");
    }
}

#[test]
fn crossing_bound_holds_on_random_killed_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..30 {
        let n = rng.gen_range(5..=25);
        let (chain, pi) = random_killed_chain(&mut rng, n);
        let ec = expected_crossings(&chain, pi.get(chain.origin())).unwrap();
        let violation = crossing_bound_violation(&chain, &pi, &ec).unwrap();
        assert!(violation < 1e-10, "Eq. (N) bound violated by {violation}");
    }
}

#[test]
fn restriction_lemma_boundary_capacity() {
    // Cap(B; c) = Cap(∂B; c) = Cap(∂B; c ↾ D) when every walk from B
    // eventually leaves it forever (killed networks)
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut done = 0;
    while done < 40 {
        let n = rng.gen_range(8..=24);
        let net = random_reversible_network(&mut rng, n);
        // B: a BFS ball (connected induced subgraph)
        let root = rng.gen_range(0..n);
        let hops = rng.gen_range(1..=2usize);
        let mut dist = vec![usize::MAX; n];
        dist[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &(y, w) in net.neighbors(x) {
                if w > 0.0 && dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        let in_b: Vec<bool> = dist.iter().map(|&d| d <= hops).collect();
        if in_b.iter().all(|&b| b) {
            continue; // B must be proper
        }
        // internal boundary: real exits or ghost edges
        let boundary: Vec<bool> = (0..n)
            .map(|x| {
                in_b[x]
                    && (net.ghost_weight(x) > 0.0
                        || net.neighbors(x).iter().any(|&(y, w)| w > 0.0 && !in_b[y]))
            })
            .collect();
        if boundary.iter().filter(|&&b| b).count() == 0 {
            continue;
        }
        let cap_b = network_capacity(&net, &in_b).unwrap();
        let cap_boundary = network_capacity(&net, &boundary).unwrap();
        // restriction to D = ∂B ∪ B^c, ghost edges kept
        let keep: Vec<bool> = (0..n).map(|x| !in_b[x] || boundary[x]).collect();
        let sub = net.restriction(&keep, true);
        let sub_boundary: Vec<bool> = (0..sub.len())
            .map(|i| boundary[net.index_of(sub.vertex(i)).unwrap()])
            .collect();
        let cap_restricted = network_capacity(&sub, &sub_boundary).unwrap();
        let scale = cap_b.abs().max(1e-9);
        assert!(
            ((cap_b - cap_boundary) / scale).abs() < 1e-8,
            "Cap(B)={cap_b} vs Cap(∂B)={cap_boundary}"
        );
        assert!(
            ((cap_b - cap_restricted) / scale).abs() < 1e-8,
            "Cap(B)={cap_b} vs restricted {cap_restricted}"
        );
        done += 1;
    }
}

#[test]
fn capadel_capacity_blowup_bound() {
    // Cap(A_δ) <= Cap(o)/δ across the δ grid on killed truncations
    for fam in standard_families() {
        let radius = 256;
        let chain = fam.truncate(radius, BoundaryMode::Killed).unwrap();
        let o = chain.origin();
        let v = hitting_voltage(&chain, &[o], 0.0).unwrap();
        let cap_o = capacity_set_with(&chain, |i| fam.pi_of(chain.state(i)), &[o]).unwrap();
        for d in 1..=9 {
            let delta = d as f64 / 10.0;
            let a: Vec<usize> = (0..chain.len()).filter(|&x| v[x] >= delta).collect();
            let cap_a =
                capacity_set_with(&chain, |i| fam.pi_of(chain.state(i)), &a).unwrap();
            assert!(
                cap_a <= cap_o / delta + 1e-10,
                "{}: Cap(A_{delta}) = {cap_a} > {} = Cap(o)/δ",
                fam.name,
                cap_o / delta
            );
        }
    }
}

#[test]
fn theorem_a_surrogate_recurrent_symmetrization() {
    // recurrent non-reversible input: both the chain's own truncated
    // capacities and the symmetrized network's tend to zero
    let fam = helix_family(&BdWeights::custom(vec![1.0]).unwrap()); // SRW helix
    let radii = [8u64, 32, 128, 512];
    let mut caps = Vec::new();
    let mut caps_s = Vec::new();
    for &r in &radii {
        let chain = fam.truncate(r, BoundaryMode::Killed).unwrap();
        let pi = fam.measure_on(&chain).unwrap();
        let o = chain.origin();
        caps.push(capacity_set(&chain, &pi, &[o]).unwrap());
        let cs = additive_symmetrization(&chain, &pi).unwrap();
        let mut in_a = vec![false; cs.len()];
        in_a[o] = true;
        caps_s.push(network_capacity(&cs, &in_a).unwrap());
    }
    for w in caps.windows(2) {
        assert!(w[1] < w[0]);
    }
    for w in caps_s.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!(caps.last().unwrap() < &(0.15 * caps[0]));
    assert!(caps_s.last().unwrap() < &(0.15 * caps_s[0]));
    // contrast: a transient instance stabilizes
    let est = capacity_profile(&two_pow_family(), &[StateId::Int(0)], &radii).unwrap();
    assert!(est.values[3] > 0.6 * est.values[0]);
}

#[test]
fn concavity_small_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for trial in 0..5 {
        let n = rng.gen_range(6..=12);
        let (chain, pi) = random_killed_chain(&mut rng, n);
        let a = vec![chain.state(chain.origin())];
        let rec = concavity_check(&chain, &pi, &a, 800, 1000 + trial).unwrap();
        assert!(
            rec.mc_mean <= rec.expected_side + 3.0 * rec.mc_se + 1e-9,
            "mean {} vs expected {} (se {})",
            rec.mc_mean,
            rec.expected_side,
            rec.mc_se
        );
    }
}

#[test]
fn bracket_width_shrinks_with_radius_for_reversed_voltage() {
    // the bracket always contains the infinite-volume value; it tightens to
    // zero exactly where the chain cannot escape before hitting the target
    let fam = biased_z_family(2.0 / 3.0);
    // v* is the left-drift walk hitting 0: 1 on the positive side, 2^x on
    // the negative side (escape probability 1 - 2^x there)
    let mut gap_plus = f64::INFINITY;
    for radius in [8u64, 32, 128] {
        let (chain, volt) =
            voltage_bracket(&fam, radius, &[StateId::Int(0)], Direction::Reversed).unwrap();
        let p = chain.require_index(StateId::Int(3)).unwrap();
        let m = chain.require_index(StateId::Int(-3)).unwrap();
        assert!(volt.lower[p] <= 1.0 + 1e-12 && volt.upper[p] >= 1.0 - 1e-12);
        assert!(volt.lower[m] <= 0.125 + 1e-12 && volt.upper[m] >= 0.125);
        let g = volt.upper[p] - volt.lower[p];
        assert!(g <= gap_plus + 1e-15);
        gap_plus = g;
    }
    assert!(gap_plus < 1e-6, "gap on the non-escaping side: {gap_plus}");
    // and the lower bracket approaches the true value on the escaping side
    let (chain, volt) =
        voltage_bracket(&fam, 256, &[StateId::Int(0)], Direction::Reversed).unwrap();
    let m = chain.require_index(StateId::Int(-3)).unwrap();
    assert!((volt.lower[m] - 0.125).abs() < 1e-9);
}

#[test]
fn truncate_preserves_row_stochasticity_proptest_style() {
    // quick randomized sweep in lieu of a full proptest harness here; the
    // proptest invariants live in chain_invariants.rs
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    for _ in 0..20 {
        let r = rng.gen_range(3..=40u64);
        for fam in standard_families() {
            for mode in [BoundaryMode::Killed, BoundaryMode::Identified] {
                let chain = fam.truncate(r, mode).unwrap();
                assert!(chain.row_sum_residual() <= 1e-12);
            }
        }
    }
}

#[test]
fn three_cycle_strict_gap_instance() {
    // deterministic cycle: Cap({0},{1}) = 1/3 but Cap_s({0},{1}) = 1/4
    let states: Vec<StateId> = (0..3).map(StateId::Int).collect();
    let rows = vec![vec![(1usize, 1.0)], vec![(2usize, 1.0)], vec![(0usize, 1.0)]];
    let chain = FiniteChain::from_rows(
        states,
        rows,
        vec![0.0; 3],
        StateId::Int(0),
        BoundaryMode::Killed,
    )
    .unwrap();
    let pi = stationary_measure(&chain).unwrap();
    let cap = capacity_between(&chain, &pi, &[0], &[1]).unwrap();
    let cs = additive_symmetrization(&chain, &pi).unwrap();
    let cap_s =
        network_capacity_between(&cs, &[true, false, false], &[false, true, false]).unwrap();
    assert!((cap / pi.get(0) - 1.0).abs() < 1e-12); // Pr_0[T_1 < T_0^+] = 1
    assert!(cap_s < cap - 1e-3 * cap);
    let ratio = cap_s / cap;
    assert!((ratio - 0.75).abs() < 1e-10, "expected 3/4 ratio, got {ratio}");
}

#[test]
fn identified_and_killed_brackets_order_correctly() {
    let fam = two_pow_family();
    // identified truncation voltage >= killed truncation voltage pointwise
    let radius = 10;
    let killed = fam.truncate(radius, BoundaryMode::Killed).unwrap();
    let ident = truncate(
        fam.kernel(),
        |s| s.radius().map(|r| r <= radius).unwrap_or(false),
        BoundaryMode::Identified,
    )
    .unwrap();
    let vk = hitting_voltage(&killed, &[killed.origin()], 0.0).unwrap();
    let vi = hitting_voltage(&ident, &[ident.origin()], 1.0).unwrap();
    for x in 0..killed.len() {
        let s = killed.state(x);
        let xi = ident.index_of(s).unwrap();
        assert!(vk[x] <= vi[xi] + 1e-12);
    }
}
