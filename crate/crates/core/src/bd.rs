//! Iterated-logarithm weight families, birth-and-death simulation with
//! crossing ledgers, dyadic induced chains, Doob conditioning and journey
//! diagnostics.

use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STEP_BUDGET: u64 = 100_000_000;

/// Per-run seeds are derived as base seed + run index.
pub fn derive_seed(base: u64, run: u64) -> u64 {
    base.wrapping_add(run)
}

/// The guarded j-th iterated logarithm: log^{(j)} i when log^{(j-1)} i >= e,
/// otherwise 1. Natural logarithm throughout; log^{(0)} i = i.
pub fn iterated_log(j: u32, i: u64) -> f64 {
    assert!(i >= 1, "iterated_log requires i >= 1");
    let mut cur = i as f64;
    if j == 0 {
        return cur;
    }
    for _ in 0..j {
        if cur >= std::f64::consts::E {
            cur = cur.ln();
        } else {
            return 1.0;
        }
    }
    cur
}

/// g_s(i) = i * prod_{j=1..s} log*^{(j)} i.
pub fn g(s: u32, i: u64) -> f64 {
    let mut out = i as f64;
    for j in 1..=s {
        out *= iterated_log(j, i);
    }
    out
}

#[derive(Debug, Clone)]
enum WeightKind {
    /// w(k-1,k) = g_{s+2}(k) (log*^{(s+3)} k)^2, constant factor 1.
    Kozma(u32),
    /// w(k-1,k) = max(k,3) ln^2 max(k,3).
    Jlp,
    /// w(k,k+1) = ratio^k.
    Geometric(f64),
    /// Explicit table of w(k,k+1); the last entry repeats beyond the table.
    Custom(Arc<Vec<f64>>),
}

/// Symmetric birth-and-death edge weights ω(k,k+1) = ω(k+1,k) > 0.
#[derive(Debug, Clone)]
pub struct BdWeights {
    pub tag: String,
    kind: WeightKind,
}

impl BdWeights {
    pub fn kozma(s: u32) -> BdWeights {
        BdWeights { tag: format!("kozma:{s}"), kind: WeightKind::Kozma(s) }
    }

    pub fn jlp() -> BdWeights {
        BdWeights { tag: "jlp".into(), kind: WeightKind::Jlp }
    }

    pub fn geometric(ratio: f64) -> BdWeights {
        assert!(ratio > 0.0);
        BdWeights { tag: format!("geometric:{ratio}"), kind: WeightKind::Geometric(ratio) }
    }

    pub fn custom(weights: Vec<f64>) -> Result<BdWeights> {
        if weights.is_empty() || weights.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
            return Err(Error::Config("custom weights must be positive".into()));
        }
        Ok(BdWeights { tag: "custom".into(), kind: WeightKind::Custom(Arc::new(weights)) })
    }

    /// ω(k, k+1).
    pub fn weight(&self, k: u64) -> f64 {
        match &self.kind {
            WeightKind::Kozma(s) => {
                let edge = k + 1; // paper indexes the edge (k-1,k) by its top端 k
                g(s + 2, edge) * iterated_log(s + 3, edge).powi(2)
            }
            WeightKind::Jlp => {
                let m = (k + 1).max(3) as f64;
                m * m.ln().powi(2)
            }
            WeightKind::Geometric(r) => r.powi(k as i32),
            WeightKind::Custom(v) => v[(k as usize).min(v.len() - 1)],
        }
    }

    /// P(i, i+1) with ω(0,-1) := 0, so P(0,1) = 1.
    pub fn up_prob(&self, i: u64) -> f64 {
        if i == 0 {
            return 1.0;
        }
        // ratio form keeps geometric weights usable past f64 overflow
        if let WeightKind::Geometric(r) = self.kind {
            return r / (r + 1.0);
        }
        let up = self.weight(i);
        let down = self.weight(i - 1);
        up / (up + down)
    }

    /// Stationary weight π(i) = ω(i-1,i) + ω(i,i+1).
    pub fn pi(&self, i: u64) -> f64 {
        if i == 0 {
            self.weight(0)
        } else {
            self.weight(i - 1) + self.weight(i)
        }
    }

    /// Effective resistance of the segment [a, b]: Σ_{i=a}^{b-1} 1/ω(i,i+1).
    pub fn resistance(&self, a: u64, b: u64) -> f64 {
        (a..b).map(|i| 1.0 / self.weight(i)).sum()
    }

    /// Exact tail resistance Σ_{i>=from} 1/ω(i,i+1) (geometric family only).
    pub fn tail_resistance_exact(&self, from: u64) -> Option<f64> {
        match self.kind {
            WeightKind::Geometric(r) if r > 1.0 => {
                Some(r.powi(-(from as i32)) * r / (r - 1.0))
            }
            _ => None,
        }
    }

    /// Analytic upper bound on the tail Σ_{i>=from} 1/ω via the integral
    /// comparison; the antiderivative of 1/ω is -1/log^{(s+3)} for the
    /// iterated-log families.
    pub fn tail_resistance_bound(&self, from: u64) -> Option<f64> {
        match &self.kind {
            WeightKind::Kozma(s) => {
                let guard = iterated_log(s + 3, from.saturating_sub(1).max(1));
                (guard > 1.0).then(|| 1.0 / guard)
            }
            WeightKind::Jlp => {
                let x = (from.saturating_sub(1)).max(3) as f64;
                Some(1.0 / x.ln())
            }
            WeightKind::Geometric(_) => self.tail_resistance_exact(from),
            WeightKind::Custom(_) => None,
        }
    }

    pub fn read_custom<R: BufRead>(r: R) -> Result<BdWeights> {
        let mut v = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            v.push(line.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: e.to_string(),
            })?);
        }
        BdWeights::custom(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopRule {
    /// Run until the level is first reached (budget permitting).
    Level(u64),
    /// Run for exactly this many steps.
    Steps(u64),
}

/// Crossing ledger of one birth-and-death run: undirected edge crossing
/// counts N(i,i+1), per-level visit counts, and run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingLedger {
    pub weights_tag: String,
    pub seeds: Vec<u64>,
    pub up: Vec<u64>,
    pub down: Vec<u64>,
    pub visits: Vec<u64>,
    pub steps: u64,
    pub final_level: u64,
    pub exhausted: bool,
}

impl CrossingLedger {
    pub fn seed(&self) -> u64 {
        self.seeds[0]
    }

    /// N(i, i+1).
    pub fn crossings(&self, i: u64) -> u64 {
        let i = i as usize;
        if i < self.up.len() {
            self.up[i] + self.down[i]
        } else {
            0
        }
    }

    pub fn max_level(&self) -> u64 {
        (self.visits.len() as u64).saturating_sub(1)
    }

    /// Ledger bookkeeping invariants: steps = Σ N(e); up/down parity per
    /// edge; visit counts obey per-level flow conservation.
    pub fn check_consistency(&self) -> Result<()> {
        let total: u64 = self.up.iter().sum::<u64>() + self.down.iter().sum::<u64>();
        if total != self.steps {
            return Err(Error::Config(format!(
                "ledger total crossings {total} != steps {}",
                self.steps
            )));
        }
        for i in 0..self.up.len() {
            let diff = self.up[i] as i64 - self.down[i] as i64;
            let expect = if (i as u64) < self.final_level { 1 } else { 0 };
            if diff != expect {
                return Err(Error::Config(format!(
                    "edge ({i},{}) has up-down imbalance {diff}, expected {expect}",
                    i + 1
                )));
            }
        }
        for lvl in 0..self.visits.len() {
            let arrivals = if lvl == 0 { 1 } else { self.up[lvl - 1] }
                + if lvl < self.down.len() { self.down[lvl] } else { 0 };
            if arrivals != self.visits[lvl] {
                return Err(Error::Config(format!(
                    "level {lvl} visits {} != arrivals {arrivals}",
                    self.visits[lvl]
                )));
            }
        }
        Ok(())
    }

    /// CSV body `i,N(i,i+1),visits(i)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,crossings,visits")?;
        for i in 0..self.visits.len() {
            let n = if i < self.up.len() { self.up[i] + self.down[i] } else { 0 };
            writeln!(w, "{},{},{}", i, n, self.visits[i])?;
        }
        Ok(())
    }

    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weights_tag": self.weights_tag,
            "seed": self.seed(),
            "seeds": self.seeds,
            "steps": self.steps,
            "final_level": self.final_level,
            "exhausted": self.exhausted,
        })
    }
}

struct UpProbCache<'a> {
    w: &'a BdWeights,
    probs: Vec<f64>,
}

impl<'a> UpProbCache<'a> {
    fn new(w: &'a BdWeights) -> Self {
        UpProbCache { w, probs: Vec::new() }
    }

    #[inline]
    fn get(&mut self, level: u64) -> f64 {
        let i = level as usize;
        while self.probs.len() <= i {
            self.probs.push(self.w.up_prob(self.probs.len() as u64));
        }
        self.probs[i]
    }
}

/// Exact path simulation from level 0. Deterministic per seed; if the step
/// budget runs out before a `Level` target the partial ledger is returned
/// with `exhausted` set.
pub fn simulate(w: &BdWeights, stop: StopRule, budget: u64, seed: u64) -> CrossingLedger {
    let mut ledger = CrossingLedger {
        weights_tag: w.tag.clone(),
        seeds: vec![seed],
        up: Vec::new(),
        down: Vec::new(),
        visits: vec![1],
        steps: 0,
        final_level: 0,
        exhausted: false,
    };
    run_into(&mut ledger, w, stop, budget, seed);
    ledger
}

/// Continues a serialized ledger with a fresh derived seed appended to its
/// seed list; deterministic given the recorded seeds.
pub fn resume(ledger: &mut CrossingLedger, w: &BdWeights, stop: StopRule, budget: u64) {
    let next_seed = derive_seed(ledger.seed(), ledger.seeds.len() as u64 * 0x9e37_79b9);
    ledger.seeds.push(next_seed);
    ledger.exhausted = false;
    run_into(ledger, w, stop, budget, next_seed);
}

fn run_into(ledger: &mut CrossingLedger, w: &BdWeights, stop: StopRule, budget: u64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = UpProbCache::new(w);
    let mut level = ledger.final_level;
    let start_steps = ledger.steps;
    loop {
        match stop {
            StopRule::Level(target) => {
                if level >= target {
                    break;
                }
            }
            StopRule::Steps(t) => {
                if ledger.steps - start_steps >= t {
                    break;
                }
            }
        }
        if ledger.steps - start_steps >= budget {
            ledger.exhausted = true;
            break;
        }
        let p = cache.get(level);
        if rng.gen::<f64>() < p {
            let i = level as usize;
            if ledger.up.len() <= i {
                ledger.up.resize(i + 1, 0);
                ledger.down.resize(i + 1, 0);
            }
            ledger.up[i] += 1;
            level += 1;
            if ledger.visits.len() <= level as usize {
                ledger.visits.resize(level as usize + 1, 0);
            }
        } else {
            let i = (level - 1) as usize;
            ledger.down[i] += 1;
            level -= 1;
        }
        ledger.visits[level as usize] += 1;
        ledger.steps += 1;
    }
    ledger.final_level = level;
}

/// As `simulate`, but records the level path (memory: one u32 per step).
pub fn simulate_with_path(
    w: &BdWeights,
    stop: StopRule,
    budget: u64,
    seed: u64,
) -> (CrossingLedger, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = UpProbCache::new(w);
    let mut ledger = CrossingLedger {
        weights_tag: w.tag.clone(),
        seeds: vec![seed],
        up: Vec::new(),
        down: Vec::new(),
        visits: vec![1],
        steps: 0,
        final_level: 0,
        exhausted: false,
    };
    let mut level: u64 = 0;
    let mut path = vec![0u32];
    loop {
        match stop {
            StopRule::Level(target) => {
                if level >= target {
                    break;
                }
            }
            StopRule::Steps(t) => {
                if ledger.steps >= t {
                    break;
                }
            }
        }
        if ledger.steps >= budget {
            ledger.exhausted = true;
            break;
        }
        let p = cache.get(level);
        if rng.gen::<f64>() < p {
            let i = level as usize;
            if ledger.up.len() <= i {
                ledger.up.resize(i + 1, 0);
                ledger.down.resize(i + 1, 0);
            }
            ledger.up[i] += 1;
            level += 1;
            if ledger.visits.len() <= level as usize {
                ledger.visits.resize(level as usize + 1, 0);
            }
        } else {
            let i = (level - 1) as usize;
            ledger.down[i] += 1;
            level -= 1;
        }
        ledger.visits[level as usize] += 1;
        ledger.steps += 1;
        path.push(level as u32);
    }
    ledger.final_level = level;
    (ledger, path)
}

/// Streaming tally of the dyadic induced chain's moves: per induced level k,
/// the number of up and down transitions observed, without recording the
/// path. Used to estimate the induced-chain edge-weight ratios.
pub fn induced_dyadic_counts(
    w: &BdWeights,
    stop: StopRule,
    budget: u64,
    seed: u64,
) -> Vec<(u64, u64)> {
    fn dyadic_label(x: u64) -> Option<u64> {
        if x == 0 {
            Some(0)
        } else if x.is_power_of_two() {
            Some(x.trailing_zeros() as u64 + 1)
        } else {
            None
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = UpProbCache::new(w);
    let mut counts: Vec<(u64, u64)> = Vec::new();
    let mut level: u64 = 0;
    let mut steps: u64 = 0;
    let mut current = Some(0u64);
    loop {
        match stop {
            StopRule::Level(target) => {
                if level >= target {
                    break;
                }
            }
            StopRule::Steps(t) => {
                if steps >= t {
                    break;
                }
            }
        }
        if steps >= budget {
            break;
        }
        let p = cache.get(level);
        if rng.gen::<f64>() < p {
            level += 1;
        } else {
            level -= 1;
        }
        steps += 1;
        if let Some(label) = dyadic_label(level) {
            if let Some(prev) = current {
                if label != prev {
                    let low = label.min(prev) as usize;
                    if counts.len() <= low {
                        counts.resize(low + 1, (0, 0));
                    }
                    if label > prev {
                        counts[low].0 += 1;
                    } else {
                        counts[low].1 += 1;
                    }
                }
            }
            current = Some(label);
        }
    }
    counts
}

/// Cut-times of a recorded integer path: t with past range and strict-future
/// range disjoint. The final index is excluded (empty future).
pub fn cut_times(path: &[u64]) -> Vec<usize> {
    if path.len() < 2 {
        return Vec::new();
    }
    let n = path.len();
    let mut suf_min = vec![0u64; n];
    let mut suf_max = vec![0u64; n];
    suf_min[n - 1] = path[n - 1];
    suf_max[n - 1] = path[n - 1];
    for t in (0..n - 1).rev() {
        suf_min[t] = suf_min[t + 1].min(path[t]);
        suf_max[t] = suf_max[t + 1].max(path[t]);
    }
    let mut out = Vec::new();
    let (mut past_min, mut past_max) = (path[0], path[0]);
    for t in 0..n - 1 {
        past_min = past_min.min(path[t]);
        past_max = past_max.max(path[t]);
        // integer BD paths have interval ranges, so disjointness is an
        // interval comparison
        if past_max < suf_min[t + 1] || past_min > suf_max[t + 1] {
            out.push(t);
        }
    }
    out
}

/// X(k): levels in [k, k²+k] visited exactly once before T_{k³}, from a
/// recorded path; X'(k) is the restriction to [k, k²].
pub fn local_regenerations(path: &[u64], k: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    let k3 = k * k * k;
    let hit = path.iter().position(|&x| x >= k3).ok_or(Error::PathTooShort {
        k,
        needed: k3,
        reached: path.iter().copied().max().unwrap_or(0),
    })?;
    let lo = k;
    let hi = k * k + k;
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for &x in &path[..=hit] {
        if x >= lo && x <= hi {
            counts[(x - lo) as usize] += 1;
        }
    }
    let x: Vec<u64> = (lo..=hi).filter(|&l| counts[(l - lo) as usize] == 1).collect();
    let xp: Vec<u64> = x.iter().copied().filter(|&l| l <= k * k).collect();
    Ok((x, xp))
}

/// Outcome of a windowed regeneration run (see `windowed_regenerations`).
#[derive(Debug, Clone)]
pub struct WindowStats {
    pub k: u64,
    pub x_size: u64,
    pub xprime_size: u64,
    pub steps: u64,
}

/// Samples X(k), X'(k) without simulating all the way to k³: the chain is
/// run exactly on [0, k²+k+1] and each excursion above the window top is
/// collapsed to a single Bernoulli draw (return vs. reach k³ first) with the
/// exact gambler's-ruin probability. Visit counts inside [k, k²+k] — all
/// that X(k) depends on — have exactly the same law as in a full run.
pub fn windowed_regenerations(w: &BdWeights, k: u64, seed: u64) -> WindowStats {
    let k3 = k * k * k;
    let top = k * k + k + 1;
    let rho = (1.0 / w.weight(top)) / w.resistance(top, k3);
    let p_up_top = w.up_prob(top);
    // one draw decides: escape to k³ before stepping down from `top`
    let escape = p_up_top * rho / (p_up_top * rho + (1.0 - p_up_top));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = UpProbCache::new(w);
    let lo = k as usize;
    let hi = (k * k + k) as usize;
    let mut counts = vec![0u64; hi - lo + 1];
    let mut level: u64 = 0;
    let mut steps: u64 = 0;
    loop {
        if level == top {
            if rng.gen::<f64>() < escape {
                break;
            }
            level -= 1;
        } else {
            let p = cache.get(level);
            if rng.gen::<f64>() < p {
                level += 1;
            } else {
                level -= 1;
            }
        }
        steps += 1;
        let l = level as usize;
        if l >= lo && l <= hi {
            counts[l - lo] += 1;
        }
    }
    let mut x_size = 0;
    let mut xprime_size = 0;
    for (off, &c) in counts.iter().enumerate() {
        if c == 1 {
            x_size += 1;
            if (lo + off) as u64 <= k * k {
                xprime_size += 1;
            }
        }
    }
    WindowStats { k, x_size, xprime_size, steps }
}

/// Non-lazy induced chain on D = {0} ∪ {2^j}: visits to D with consecutive
/// repeats removed, relabeled 0 ↦ 0 and 2^{j} ↦ j+1.
pub fn induce_dyadic(path: &[u64]) -> Result<Vec<u64>> {
    fn dyadic_label(x: u64) -> Option<u64> {
        if x == 0 {
            Some(0)
        } else if x.is_power_of_two() {
            Some(x.trailing_zeros() as u64 + 1)
        } else {
            None
        }
    }
    let mut out: Vec<u64> = Vec::new();
    for &x in path {
        if let Some(label) = dyadic_label(x) {
            if out.last() != Some(&label) {
                out.push(label);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoDyadicVisit);
    }
    Ok(out)
}

/// Doob transform of a BD segment conditioned on hitting `target` before
/// `ell`: p_i are resistance ratios and the conditioned edge weights are
/// ω̂_m = ω_m p_m p_{m+1}.
#[derive(Debug, Clone)]
pub struct DoobWeights {
    pub ell: u64,
    pub target: u64,
    /// p[i - ell] = Pr_i[T_target < T_ell].
    pub p: Vec<f64>,
    /// conditioned[m - ell] = ω̂(m, m+1) for m in [ell, target).
    pub conditioned: Vec<f64>,
}

impl DoobWeights {
    /// Up-probability of the conditioned walk at level i ∈ (ell, target).
    pub fn up_prob(&self, i: u64) -> f64 {
        assert!(i > self.ell && i < self.target);
        let m = (i - self.ell) as usize;
        let up = self.conditioned[m];
        let down = self.conditioned[m - 1];
        up / (up + down)
    }
}

pub fn doob_condition_weights(w: &BdWeights, ell: u64, target: u64) -> Result<DoobWeights> {
    if ell >= target {
        return Err(Error::BadConditioning { ell, target });
    }
    let total = w.resistance(ell, target);
    let mut p = Vec::with_capacity((target - ell + 1) as usize);
    let mut acc = 0.0;
    p.push(0.0);
    for i in ell..target {
        acc += 1.0 / w.weight(i);
        p.push(acc / total);
    }
    let last = p.len() - 1;
    p[last] = 1.0;
    let conditioned: Vec<f64> = (ell..target)
        .map(|m| {
            let i = (m - ell) as usize;
            w.weight(m) * p[i] * p[i + 1]
        })
        .collect();
    Ok(DoobWeights { ell, target, p, conditioned })
}

/// Runs the conditioned walk from ell+1 until `target`, returning the path.
pub fn simulate_conditioned(dw: &DoobWeights, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = dw.ell + 1;
    let mut path = vec![level];
    while level < dw.target {
        let p = if level == dw.ell + 1 && dw.conditioned[0] == 0.0 {
            1.0
        } else {
            dw.up_prob(level)
        };
        if rng.gen::<f64>() < p {
            level += 1;
        } else {
            level -= 1;
        }
        path.push(level);
    }
    path
}

/// One journey 0 → 2n on a unit-weight segment (last edge weight in [1,3]):
/// K_i counts transitions i+1 → i before T_{2n}, with the recorded
/// branching/immigration decomposition K_{j+1} = J_{j+1} + Σ_{ℓ<=K_j} ξ_ℓ.
#[derive(Debug, Clone)]
pub struct JourneyStats {
    pub n: u64,
    pub k: Vec<u64>,
    /// xi[j] holds ξ_ℓ^{(j+1)} for ℓ = 1..K_j (offspring windows of edge j).
    pub xi: Vec<Vec<u64>>,
    /// imm[j] = J_{j+1}, transitions j+2 → j+1 after the last visit to j.
    pub imm: Vec<u64>,
    pub steps: u64,
}

impl JourneyStats {
    /// Re-verifies the bookkeeping identity on this journey.
    pub fn decomposition_holds(&self) -> bool {
        for j in 0..self.imm.len() {
            let sum: u64 = self.imm[j] + self.xi[j].iter().sum::<u64>();
            if sum != self.k[j + 1] {
                return false;
            }
        }
        true
    }
}

pub fn journey_crossing_process(n: u64, last_edge_weight: f64, seed: u64) -> Result<JourneyStats> {
    if n == 0 {
        return Err(Error::Config("journey needs n >= 1".into()));
    }
    if !(1.0..=3.0).contains(&last_edge_weight) {
        return Err(Error::Config("last edge weight must lie in [1,3]".into()));
    }
    let top = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // crossing times per edge, with direction (true = down)
    let mut events: Vec<Vec<(u64, bool)>> = vec![Vec::new(); top as usize];
    let mut level: u64 = 0;
    let mut t: u64 = 0;
    while level < top {
        let up_p = if level == 0 {
            1.0
        } else if level == top - 1 {
            last_edge_weight / (1.0 + last_edge_weight)
        } else {
            0.5
        };
        if rng.gen::<f64>() < up_p {
            events[level as usize].push((t, false));
            level += 1;
        } else {
            events[(level - 1) as usize].push((t, true));
            level -= 1;
        }
        t += 1;
    }
    let k: Vec<u64> = events
        .iter()
        .map(|e| e.iter().filter(|(_, down)| *down).count() as u64)
        .collect();
    let mut xi: Vec<Vec<u64>> = Vec::with_capacity(top as usize - 1);
    let mut imm: Vec<u64> = Vec::with_capacity(top as usize - 1);
    for j in 0..(top - 1) as usize {
        let lower = &events[j];
        let upper = &events[j + 1];
        let down_times: Vec<u64> = upper
            .iter()
            .filter(|(_, down)| *down)
            .map(|(time, _)| *time)
            .collect();
        let mut windows = Vec::new();
        let mut w = 0;
        for pair in lower.chunks(2) {
            if pair.len() == 2 {
                let (a, b) = (pair[0].0, pair[1].0);
                let mut cnt = 0u64;
                while w < down_times.len() && down_times[w] < b {
                    if down_times[w] > a {
                        cnt += 1;
                    }
                    w += 1;
                }
                windows.push(cnt);
            }
        }
        let last_visit = lower.last().map(|(time, _)| *time).unwrap_or(0);
        let j_imm = down_times.iter().filter(|&&time| time > last_visit).count() as u64;
        xi.push(windows);
        imm.push(j_imm);
    }
    Ok(JourneyStats { n, k, xi, imm, steps: t })
}
