//! The planar spiral chain on Z²: counter-clockwise motion inside sup-norm
//! spheres S(k) with rare radial jumps driven by the birth-and-death kernel
//! Q of the s = 4 iterated-log weights, plus the bounded-below variant whose
//! transition probabilities stay uniformly positive.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bd::BdWeights;
use crate::chain::TransitionKernel;
use crate::error::{Error, Result};
use crate::state::StateId;

pub type LatticePoint = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Origin,
    /// |x| = |y| = k > 0.
    Corner(u32),
    Side(u32),
}

pub fn sphere_index(p: LatticePoint) -> u32 {
    p.0.unsigned_abs().max(p.1.unsigned_abs())
}

pub fn classify(p: LatticePoint) -> PointClass {
    let k = sphere_index(p);
    if k == 0 {
        PointClass::Origin
    } else if p.0.abs() == p.1.abs() {
        PointClass::Corner(k)
    } else {
        PointClass::Side(k)
    }
}

/// Next point counter-clockwise within S(k). Orientation: the right side
/// (x = k) moves +y, the top −x, the left −y, the bottom +x; corners turn
/// into the following side.
pub fn ccw_next(p: LatticePoint) -> Result<LatticePoint> {
    let (x, y) = p;
    let k = sphere_index(p) as i32;
    if k == 0 {
        return Err(Error::NoRadialNeighbor("origin has no sphere motion".into()));
    }
    Ok(if x == k && y < k {
        (x, y + 1) // right side (incl. bottom-right corner) heads up
    } else if y == k && x > -k {
        (x - 1, y) // top side (incl. top-right corner) heads left
    } else if x == -k && y > -k {
        (x, y - 1) // left side (incl. top-left corner) heads down
    } else {
        (x + 1, y) // bottom side (incl. bottom-left corner) heads right
    })
}

/// Clockwise neighbor: the inverse permutation of `ccw_next` on S(k).
pub fn cw_next(p: LatticePoint) -> Result<LatticePoint> {
    let (x, y) = p;
    let k = sphere_index(p) as i32;
    if k == 0 {
        return Err(Error::NoRadialNeighbor("origin has no sphere motion".into()));
    }
    Ok(if x == k && y > -k {
        (x, y - 1) // right side (incl. top-right corner) heads down
    } else if y == k && x < k {
        (x + 1, y) // top side (incl. top-left corner) heads right
    } else if x == -k && y < k {
        (x, y + 1) // left side (incl. bottom-left corner) heads up
    } else {
        (x - 1, y) // bottom side heads left
    })
}

/// The unique Z²-adjacent vertex in S(k-1); corners have none.
pub fn inward(p: LatticePoint) -> Result<LatticePoint> {
    match classify(p) {
        PointClass::Origin => Err(Error::NoRadialNeighbor("origin".into())),
        PointClass::Corner(_) => Err(Error::NoRadialNeighbor(format!(
            "corner ({}, {}) has no inward neighbor",
            p.0, p.1
        ))),
        PointClass::Side(k) => {
            let k = k as i32;
            let (x, y) = p;
            Ok(if x == k {
                (x - 1, y)
            } else if x == -k {
                (x + 1, y)
            } else if y == k {
                (x, y - 1)
            } else {
                (x, y + 1)
            })
        }
    }
}

/// The unique Z²-adjacent vertex in S(k+1); corners have two, so they error.
pub fn outward(p: LatticePoint) -> Result<LatticePoint> {
    match classify(p) {
        PointClass::Origin => Err(Error::NoRadialNeighbor("origin: all of S(1) is adjacent".into())),
        PointClass::Corner(_) => Err(Error::NoRadialNeighbor(format!(
            "corner ({}, {}) has two outward neighbors",
            p.0, p.1
        ))),
        PointClass::Side(k) => {
            let k = k as i32;
            let (x, y) = p;
            Ok(if x == k {
                (x + 1, y)
            } else if x == -k {
                (x - 1, y)
            } else if y == k {
                (x, y + 1)
            } else {
                (x, y - 1)
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Sides: ccw w.p. 1 − 1/k², radial w.p. Q(k,·)/k². Corners: ccw w.p. 1.
    Kozma,
    /// Sides: ccw 1/3, cw 1/6, radial Q(k,·)/2. Corners: ccw 2/3, cw 1/3.
    BoundedBelow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpiralConfig {
    pub variant: Variant,
    pub max_radius: u32,
    pub step_budget: u64,
    pub seed: u64,
}

impl SpiralConfig {
    pub fn new(variant: Variant, max_radius: u32, step_budget: u64, seed: u64) -> Self {
        SpiralConfig { variant, max_radius, step_budget, seed }
    }
}

/// Radial kernel of the spiral: the s = 4 iterated-log weights.
pub fn radial_weights() -> BdWeights {
    BdWeights::kozma(4)
}

/// Exact step distribution at `p`. Probabilities sum to 1.
pub fn step_distribution(
    p: LatticePoint,
    variant: Variant,
    q: &BdWeights,
) -> Vec<(LatticePoint, f64)> {
    match classify(p) {
        PointClass::Origin => vec![
            ((1, 0), 0.25),
            ((0, 1), 0.25),
            ((-1, 0), 0.25),
            ((0, -1), 0.25),
        ],
        PointClass::Corner(_) => match variant {
            Variant::Kozma => vec![(ccw_next(p).unwrap(), 1.0)],
            Variant::BoundedBelow => vec![
                (ccw_next(p).unwrap(), 2.0 / 3.0),
                (cw_next(p).unwrap(), 1.0 / 3.0),
            ],
        },
        PointClass::Side(k) => {
            let up = q.up_prob(k as u64);
            let down = 1.0 - up;
            match variant {
                Variant::Kozma => {
                    let k2 = (k as f64) * (k as f64);
                    let stay = 1.0 - 1.0 / k2;
                    let mut out = Vec::with_capacity(3);
                    if stay > 0.0 {
                        out.push((ccw_next(p).unwrap(), stay));
                    }
                    out.push((outward(p).unwrap(), up / k2));
                    if down > 0.0 {
                        out.push((inward(p).unwrap(), down / k2));
                    }
                    out
                }
                Variant::BoundedBelow => {
                    let mut out = vec![
                        (ccw_next(p).unwrap(), 1.0 / 3.0),
                        (cw_next(p).unwrap(), 1.0 / 6.0),
                        (outward(p).unwrap(), up / 2.0),
                    ];
                    if down > 0.0 {
                        out.push((inward(p).unwrap(), down / 2.0));
                    }
                    out
                }
            }
        }
    }
}

/// The spiral as a lazy kernel, for truncations and potential computations.
#[derive(Debug, Clone)]
pub struct SpiralKernel {
    pub variant: Variant,
    q: BdWeights,
}

impl SpiralKernel {
    pub fn new(variant: Variant) -> Self {
        SpiralKernel { variant, q: radial_weights() }
    }
}

impl TransitionKernel for SpiralKernel {
    fn row(&self, x: StateId) -> Vec<(StateId, f64)> {
        let p = x.as_pair().expect("spiral kernel expects Pair states");
        step_distribution(p, self.variant, &self.q)
            .into_iter()
            .map(|(q, w)| (StateId::Pair(q.0, q.1), w))
            .collect()
    }

    fn origin(&self) -> StateId {
        StateId::Pair(0, 0)
    }
}

/// Per-edge crossing counts within the simulation box, radial transition
/// tallies and run metadata.
#[derive(Debug, Clone)]
pub struct EdgeCoverage {
    pub variant: Variant,
    pub seed: u64,
    pub max_radius: u32,
    /// Horizontal/vertical edge counters, flat-indexed over the box.
    counts: Vec<u64>,
    box_radius: i32,
    /// down_transitions[k] counts S(k+1) → S(k) moves.
    pub down_transitions: Vec<u64>,
    pub up_transitions: Vec<u64>,
    pub steps: u64,
    pub final_point: LatticePoint,
    pub exhausted: bool,
}

impl EdgeCoverage {
    fn new(variant: Variant, seed: u64, max_radius: u32) -> Self {
        let box_radius = max_radius as i32 + 1;
        let m = (2 * box_radius + 2) as usize;
        EdgeCoverage {
            variant,
            seed,
            max_radius,
            counts: vec![0; m * m * 2],
            box_radius,
            down_transitions: vec![0; max_radius as usize + 2],
            up_transitions: vec![0; max_radius as usize + 2],
            steps: 0,
            final_point: (0, 0),
            exhausted: false,
        }
    }

    #[inline]
    fn edge_slot(&self, from: LatticePoint, to: LatticePoint) -> usize {
        // canonical endpoint: the lexicographically smaller one
        let (a, b) = if from <= to { (from, to) } else { (to, from) };
        let m = (2 * self.box_radius + 2) as usize;
        let xi = (a.0 + self.box_radius) as usize;
        let yi = (a.1 + self.box_radius) as usize;
        let dir = usize::from(b.0 == a.0); // 0 horizontal, 1 vertical
        (xi * m + yi) * 2 + dir
    }

    #[inline]
    fn record(&mut self, from: LatticePoint, to: LatticePoint) {
        let slot = self.edge_slot(from, to);
        self.counts[slot] += 1;
    }

    /// Crossing count of the lattice edge {a, b}.
    pub fn crossings(&self, a: LatticePoint, b: LatticePoint) -> u64 {
        if sphere_index(a).max(sphere_index(b)) > self.box_radius as u32 {
            return 0;
        }
        self.counts[self.edge_slot(a, b)]
    }

    /// All edges of the box of radius R with both endpoints in it.
    pub fn box_edges(r: u32) -> Vec<(LatticePoint, LatticePoint)> {
        let r = r as i32;
        let mut edges = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                if x < r {
                    edges.push(((x, y), (x + 1, y)));
                }
                if y < r {
                    edges.push(((x, y), (x, y + 1)));
                }
            }
        }
        edges
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1,y1,x2,y2,count")?;
        for ((a, b), c) in Self::box_edges(self.max_radius)
            .into_iter()
            .map(|e| (e, self.crossings(e.0, e.1)))
        {
            if c > 0 {
                writeln!(w, "{},{},{},{},{}", a.0, a.1, b.0, b.1, c)?;
            }
        }
        Ok(())
    }

    pub fn summary_json(&self, report_radius: u32) -> serde_json::Value {
        let report = coverage_report(self, report_radius);
        serde_json::json!({
            "variant": format!("{:?}", self.variant),
            "R": report_radius,
            "seed": self.seed,
            "steps": self.steps,
            "final_point": [self.final_point.0, self.final_point.1],
            "exhausted": self.exhausted,
            "uncovered_in_box": report.uncovered.len(),
            "down_transitions_per_k": self.down_transitions,
        })
    }
}

/// Runs the spiral from the origin until the sup-norm radius exceeds
/// `max_radius` or the budget is exhausted. Deterministic per seed.
pub fn simulate(config: &SpiralConfig) -> EdgeCoverage {
    let q = radial_weights();
    let mut cov = EdgeCoverage::new(config.variant, config.seed, config.max_radius);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // per-sphere move thresholds: [ccw, ccw+cw, ccw+cw+out] cumulative
    let kmax = config.max_radius as usize + 1;
    let mut thr: Vec<[f64; 3]> = Vec::with_capacity(kmax + 1);
    thr.push([0.0, 0.0, 0.0]); // unused at k = 0
    for k in 1..=kmax {
        let up = q.up_prob(k as u64);
        let (ccw, cw, out) = match config.variant {
            Variant::Kozma => {
                let k2 = (k * k) as f64;
                (1.0 - 1.0 / k2, 0.0, up / k2)
            }
            Variant::BoundedBelow => (1.0 / 3.0, 1.0 / 6.0, up / 2.0),
        };
        thr.push([ccw, ccw + cw, ccw + cw + out]);
    }
    let corner_ccw = match config.variant {
        Variant::Kozma => 1.0,
        Variant::BoundedBelow => 2.0 / 3.0,
    };

    let mut p: LatticePoint = (0, 0);
    loop {
        let k = sphere_index(p);
        if k > config.max_radius {
            break;
        }
        if cov.steps >= config.step_budget {
            cov.exhausted = true;
            break;
        }
        let next: LatticePoint = if k == 0 {
            match rng.gen_range(0..4u8) {
                0 => (1, 0),
                1 => (0, 1),
                2 => (-1, 0),
                _ => (0, -1),
            }
        } else if p.0.abs() == p.1.abs() {
            if corner_ccw >= 1.0 || rng.gen::<f64>() < corner_ccw {
                ccw_next(p).unwrap()
            } else {
                cw_next(p).unwrap()
            }
        } else {
            let t = &thr[k as usize];
            let r = rng.gen::<f64>();
            if r < t[0] {
                ccw_next(p).unwrap()
            } else if r < t[1] {
                cw_next(p).unwrap()
            } else if r < t[2] {
                outward(p).unwrap()
            } else {
                inward(p).unwrap()
            }
        };
        let nk = sphere_index(next);
        if nk > k {
            cov.up_transitions[k as usize] += 1;
        } else if nk < k {
            cov.down_transitions[nk as usize] += 1;
        }
        cov.record(p, next);
        cov.steps += 1;
        p = next;
    }
    cov.final_point = p;
    cov
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub box_radius: u32,
    /// Edges of the box never crossed.
    pub uncovered: Vec<(LatticePoint, LatticePoint)>,
    /// Minimum crossing count among edges incident to each annulus S(k).
    pub annulus_min: Vec<u64>,
    /// Per k, the number of uncrossed edges between S(k) and S(k+1).
    pub radial_uncrossed: Vec<u32>,
}

pub fn coverage_report(cov: &EdgeCoverage, r: u32) -> CoverageReport {
    let r = r.min(cov.max_radius);
    let mut uncovered = Vec::new();
    let mut annulus_min = vec![u64::MAX; r as usize + 1];
    let mut radial_uncrossed = vec![0u32; r as usize + 1];
    for (a, b) in EdgeCoverage::box_edges(r) {
        let c = cov.crossings(a, b);
        if c == 0 {
            uncovered.push((a, b));
        }
        let (ka, kb) = (sphere_index(a), sphere_index(b));
        let k = ka.min(kb) as usize;
        if k < annulus_min.len() {
            annulus_min[k] = annulus_min[k].min(c);
        }
        if ka != kb && c == 0 && k < radial_uncrossed.len() {
            radial_uncrossed[k] += 1;
        }
    }
    for m in annulus_min.iter_mut() {
        if *m == u64::MAX {
            *m = 0;
        }
    }
    CoverageReport { box_radius: r, uncovered, annulus_min, radial_uncrossed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify((0, 0)), PointClass::Origin);
        assert_eq!(classify((3, -3)), PointClass::Corner(3));
        assert_eq!(classify((2, 1)), PointClass::Side(2));
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(ccw_next((2, 0)).unwrap(), (2, 1));
        assert_eq!(outward((2, 0)).unwrap(), (3, 0));
        assert_eq!(inward((2, 0)).unwrap(), (1, 0));
        assert_eq!(ccw_next((2, 2)).unwrap(), (1, 2));
        assert!(inward((2, 2)).is_err());
        assert!(outward((2, 2)).is_err());
    }

    #[test]
    fn ccw_is_a_cycle_and_cw_inverts_it() {
        for k in 1..=5i32 {
            let start = (k, 1 - k); // just above the bottom-right corner
            let mut p = start;
            let mut count = 0;
            loop {
                let next = ccw_next(p).unwrap();
                assert_eq!(sphere_index(next), k as u32);
                assert_eq!(cw_next(next).unwrap(), p);
                // lattice neighbors
                assert_eq!((next.0 - p.0).abs() + (next.1 - p.1).abs(), 1);
                p = next;
                count += 1;
                if p == start {
                    break;
                }
            }
            assert_eq!(count, 8 * k); // |S(k)| = 8k
        }
    }

    #[test]
    fn inward_unique_neighbor_check() {
        for k in 2..=6i32 {
            for y in (1 - k)..k {
                let p = (k, y);
                let inw = inward(p).unwrap();
                assert_eq!(sphere_index(inw), (k - 1) as u32);
                // uniqueness: no other Z² neighbor lies in S(k-1)
                let mut count = 0;
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let q = (p.0 + dx, p.1 + dy);
                    if sphere_index(q) == (k - 1) as u32 {
                        count += 1;
                    }
                }
                assert_eq!(count, 1);
            }
        }
    }

    #[test]
    fn step_distribution_sums_to_one_both_variants() {
        let q = radial_weights();
        let pts = [
            (0, 0),
            (1, 0),
            (0, -1),
            (2, 2),
            (-3, 1),
            (5, -5),
            (7, 3),
            (-4, -4),
            (10, -2),
        ];
        for variant in [Variant::Kozma, Variant::BoundedBelow] {
            for &p in &pts {
                let dist = step_distribution(p, variant, &q);
                let total: f64 = dist.iter().map(|(_, w)| w).sum();
                assert!((total - 1.0).abs() < 1e-12, "{variant:?} at {p:?}");
                for (to, w) in &dist {
                    assert!(*w > 0.0);
                    let d = (to.0 - p.0).abs() + (to.1 - p.1).abs();
                    assert_eq!(d, 1, "non-neighbor move {p:?} -> {to:?}");
                }
            }
        }
    }

    #[test]
    fn origin_and_corner_rows() {
        let q = radial_weights();
        let origin = step_distribution((0, 0), Variant::Kozma, &q);
        assert_eq!(origin.len(), 4);
        for (to, w) in origin {
            assert!((w - 0.25).abs() < 1e-15);
            assert_eq!(classify(to), PointClass::Side(1));
        }
        let corner = step_distribution((2, 2), Variant::Kozma, &q);
        assert_eq!(corner, vec![((1, 2), 1.0)]);
    }

    #[test]
    fn k1_sides_move_radially_with_probability_one() {
        // 1 - 1/k² = 0 at k = 1: the kozma variant leaves S(1) sides
        // radially, split as Q(1,2), Q(1,0)
        let q = radial_weights();
        let dist = step_distribution((1, 0), Variant::Kozma, &q);
        let up = q.up_prob(1);
        assert_eq!(dist.len(), 2);
        assert_eq!(dist[0].0, (2, 0));
        assert!((dist[0].1 - up).abs() < 1e-15);
        assert_eq!(dist[1].0, (0, 0));
        assert!((dist[1].1 - (1.0 - up)).abs() < 1e-15);
    }

    #[test]
    fn simulate_deterministic_and_path_contiguous() {
        let config = SpiralConfig::new(Variant::Kozma, 8, 10_000_000, 5);
        let a = simulate(&config);
        let b = simulate(&config);
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.final_point, b.final_point);
        assert_eq!(a.down_transitions, b.down_transitions);
        assert!(!a.exhausted);
        assert_eq!(sphere_index(a.final_point), 9);

        let budget = SpiralConfig::new(Variant::Kozma, 1 << 14, 5_000, 5);
        let c = simulate(&budget);
        assert!(c.exhausted);
        assert_eq!(c.steps, 5_000);
    }

    #[test]
    fn corner_never_moves_radially() {
        // probability-0 by construction; assert over a long run that no
        // sampled transition leaves a corner radially
        let config = SpiralConfig::new(Variant::BoundedBelow, 6, 2_000_000, 11);
        let cov = simulate(&config);
        for k in 1..=5i32 {
            for corner in [(k, k), (-k, k), (k, -k), (-k, -k)] {
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let nb = (corner.0 + dx, corner.1 + dy);
                    if sphere_index(nb) != k as u32 {
                        // radial edge at a corner: any crossings must be
                        // inbound only; outbound is impossible, and inbound
                        // edges from S(k+1) to corners are allowed
                        let _ = cov.crossings(corner, nb);
                    }
                }
            }
        }
        // direct check on the distribution instead: corners only move in-sphere
        let q = radial_weights();
        for variant in [Variant::Kozma, Variant::BoundedBelow] {
            for (to, _) in step_distribution((3, 3), variant, &q) {
                assert_eq!(sphere_index(to), 3);
            }
        }
    }

    #[test]
    fn coverage_report_empty_and_full() {
        let cov = EdgeCoverage::new(Variant::Kozma, 0, 4);
        let rep = coverage_report(&cov, 3);
        assert_eq!(rep.uncovered.len(), EdgeCoverage::box_edges(3).len());

        let mut full = EdgeCoverage::new(Variant::Kozma, 0, 4);
        for (a, b) in EdgeCoverage::box_edges(3) {
            full.record(a, b);
        }
        let rep2 = coverage_report(&full, 3);
        assert!(rep2.uncovered.is_empty());
        assert!(rep2.annulus_min.iter().all(|&m| m == 1));
    }

    #[test]
    fn sphere_change_counts_match_down_transitions() {
        let config = SpiralConfig::new(Variant::Kozma, 12, 50_000_000, 23);
        let cov = simulate(&config);
        // radial bookkeeping: ups minus downs per level telescope to the
        // final sphere index
        let k = sphere_index(cov.final_point) as usize;
        for lvl in 0..cov.up_transitions.len() {
            let net = cov.up_transitions[lvl] as i64 - cov.down_transitions[lvl] as i64;
            let expect = if lvl < k { 1 } else { 0 };
            assert_eq!(net, expect, "level {lvl}");
        }
    }
}
