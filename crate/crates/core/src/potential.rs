//! Voltages, Green functions, capacities (probabilistic and variational),
//! Dirichlet energy, effective resistance and expected-crossing networks.
//!
//! Everything here is an exact linear solve on a finite chain or network.
//! Killed truncations play the role of infinity: the cemetery carries the
//! escape channel, and a truncation ladder yields monotone brackets.

use serde::Serialize;

use crate::chain::{time_reversal, BoundaryMode, FiniteChain, Measure};
use crate::error::{Error, Result};
use crate::instances::ChainFamily;
use crate::network::Network;
use crate::solver::solve_sparse;
use crate::state::StateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Reversed,
}

fn is_absorbing(chain: &FiniteChain, x: usize) -> bool {
    chain.prob(x, x) >= 1.0 - 1e-12
}

/// Vertices whose total weight sinks below this floor (possible through
/// underflow of Green values far from the origin) are dropped from network
/// solves; their conductance contribution is smaller than the floor itself.
const WEIGHT_FLOOR: f64 = 1e-280;

/// Exact hitting voltage on one finite chain: v(x) = Pr_x[T_A before
/// absorption], with the cemetery (and any absorbing state outside A) held
/// at `boundary_value`. Killed truncations give the lower bracket with 0,
/// the value-1 boundary gives the upper bracket.
pub fn hitting_voltage(
    chain: &FiniteChain,
    targets: &[usize],
    boundary_value: f64,
) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let n = chain.len();
    let mut in_target = vec![false; n];
    for &t in targets {
        in_target[t] = true;
    }
    // unknowns: states neither targeted nor absorbing
    let mut unknown_of = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for x in 0..n {
        if !in_target[x] && !is_absorbing(chain, x) {
            unknown_of[x] = unknowns.len();
            unknowns.push(x);
        }
    }
    let m = unknowns.len();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut rhs = vec![0.0; m];
    for (r, &x) in unknowns.iter().enumerate() {
        let mut row = vec![(r, 1.0)];
        let mut b = chain.kill(x) * boundary_value;
        for &(y, p) in chain.row(x) {
            if in_target[y] {
                b += p;
            } else if is_absorbing(chain, y) {
                b += p * boundary_value;
            } else if y == x {
                row[0].1 -= p;
            } else {
                row.push((unknown_of[y], -p));
            }
        }
        rows.push(row);
        rhs[r] = b;
    }
    let sol = solve_sparse(m, &rows, &rhs)?;
    let mut v = vec![boundary_value; n];
    for (r, &x) in unknowns.iter().enumerate() {
        v[x] = sol[r];
    }
    for &t in targets {
        v[t] = 1.0;
    }
    v
        .iter()
        .all(|x| x.is_finite())
        .then_some(v)
        .ok_or_else(|| Error::Solver("non-finite voltage".into()))
}

/// Two-sided voltage bracket from one truncation radius.
#[derive(Debug, Clone)]
pub struct VoltageField {
    pub states: Vec<StateId>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub targets: Vec<StateId>,
    pub radius: u64,
}

impl VoltageField {
    pub fn exact(chain: &FiniteChain, values: Vec<f64>, targets: Vec<StateId>, radius: u64) -> Self {
        VoltageField {
            states: chain.states().to_vec(),
            lower: values.clone(),
            upper: values,
            targets,
            radius,
        }
    }

    pub fn gap(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(0.0f64, |m, (l, u)| m.max(u - l))
    }
}

/// Bracketed voltage for a chain family at one truncation radius. The
/// reversed direction solves on the time-reversal w.r.t. the family measure.
/// Returns the (killed) truncation used, for support queries downstream.
pub fn voltage_bracket(
    family: &ChainFamily,
    radius: u64,
    targets: &[StateId],
    direction: Direction,
) -> Result<(FiniteChain, VoltageField)> {
    let chain = family.truncate(radius, BoundaryMode::Killed)?;
    let pi = family.measure_on(&chain)?;
    let solve_chain = match direction {
        Direction::Forward => chain.clone(),
        Direction::Reversed => time_reversal(&chain, &pi)?,
    };
    let idx: Vec<usize> = targets
        .iter()
        .map(|t| solve_chain.require_index(*t))
        .collect::<Result<_>>()?;
    let lower = hitting_voltage(&solve_chain, &idx, 0.0)?;
    let upper = hitting_voltage(&solve_chain, &idx, 1.0)?;
    Ok((
        chain,
        VoltageField {
            states: solve_chain.states().to_vec(),
            lower,
            upper,
            targets: targets.to_vec(),
            radius,
        },
    ))
}

/// Green function row G(o, ·) and α = G(o,o)/π(o) = 1/Cap(o).
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub origin: usize,
    pub g: Vec<f64>,
    pub alpha: f64,
}

/// G(o,y) = Σ_n P^n(o,y) by the transposed solve (I-P)^T g = e_o. Requires
/// a killed chain (every state must eventually escape). Only the measure at
/// the origin enters (through α), so huge-range measures stay usable.
pub fn green_table(chain: &FiniteChain, pi_origin: f64) -> Result<GreenTable> {
    let n = chain.len();
    for x in 0..n {
        if is_absorbing(chain, x) {
            return Err(Error::Solver(format!(
                "green function diverges: {} is absorbing",
                chain.state(x)
            )));
        }
    }
    let cols = chain.transposed_rows();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for y in 0..n {
        let mut row = vec![(y, 1.0)];
        for &(x, p) in &cols[y] {
            if x == y {
                row[0].1 -= p;
            } else {
                row.push((x, -p));
            }
        }
        rows.push(row);
    }
    let mut rhs = vec![0.0; n];
    rhs[chain.origin()] = 1.0;
    let g = solve_sparse(n, &rows, &rhs)?;
    let alpha = g[chain.origin()] / pi_origin;
    Ok(GreenTable { origin: chain.origin(), g, alpha })
}

/// Max deviation of the identity G(o,y)·π(o) = π(y)·v*(y)·G(o,o), with v*
/// the reversed-chain voltage of the origin.
pub fn green_identity_deviation(
    chain: &FiniteChain,
    pi: &Measure,
    table: &GreenTable,
) -> Result<f64> {
    let rev = time_reversal(chain, pi)?;
    let vstar = hitting_voltage(&rev, &[chain.origin()], 0.0)?;
    let o = chain.origin();
    let scale = table.g[o] * pi.get(o);
    let mut dev: f64 = 0.0;
    for y in 0..chain.len() {
        let lhs = table.g[y] * pi.get(o);
        let rhs = pi.get(y) * vstar[y] * table.g[o];
        dev = dev.max((lhs - rhs).abs() / scale.max(1.0));
    }
    Ok(dev)
}

/// Cap(C) with the measure supplied lazily (only target states are read).
pub fn capacity_set_with(
    chain: &FiniteChain,
    pi_at: impl Fn(usize) -> f64,
    targets: &[usize],
) -> Result<f64> {
    if targets.is_empty() {
        return Ok(0.0);
    }
    let mut blocked = vec![false; chain.len()];
    for &t in targets {
        blocked[t] = true;
    }
    let h = escape_value(chain, &blocked, None)?;
    let mut cap = 0.0;
    for &a in targets {
        let mut esc = chain.kill(a);
        for &(y, p) in chain.row(a) {
            if !blocked[y] {
                esc += p * h[y];
            }
        }
        cap += pi_at(a) * esc;
    }
    Ok(cap)
}

/// Expected-crossings network E_o[N(x,y)] = G(o,x)P(x,y) + G(o,y)P(y,x),
/// with ghost weight G(o,x)·kill(x) for the escape crossings.
#[derive(Debug)]
pub struct ExpectedCrossings {
    pub network: Network,
    pub green: GreenTable,
}

pub fn expected_crossings(chain: &FiniteChain, pi_origin: f64) -> Result<ExpectedCrossings> {
    let green = green_table(chain, pi_origin)?;
    let mut net = Network::new(chain.states().to_vec());
    for (x, y) in chain.support_edges() {
        let w = green.g[x] * chain.prob(x, y) + green.g[y] * chain.prob(y, x);
        if w > 0.0 {
            net.add_edge_weight(x, y, w);
        }
    }
    for x in 0..chain.len() {
        let w = green.g[x] * chain.kill(x);
        if w > 0.0 {
            net.add_ghost_weight(x, w);
        }
    }
    Ok(ExpectedCrossings { network: net, green })
}

/// Max violation of the crossing bound E_o[N(x,y)] ≤ 2 α c_s(x,y)
/// max{v*(x), v*(y)}. Needs the full measure, so only usable when π stays
/// within f64 range across the truncation.
pub fn crossing_bound_violation(
    chain: &FiniteChain,
    pi: &Measure,
    ec: &ExpectedCrossings,
) -> Result<f64> {
    let rev = time_reversal(chain, pi)?;
    let vstar = hitting_voltage(&rev, &[chain.origin()], 0.0)?;
    let cs = crate::chain::additive_symmetrization(chain, pi)?;
    let mut violation: f64 = 0.0;
    for (x, y, w) in ec.network.edges() {
        let bound = 2.0 * ec.green.alpha * cs.weight(x, y) * vstar[x].max(vstar[y]);
        violation = violation.max(w - bound);
    }
    Ok(violation)
}

fn escape_value(chain: &FiniteChain, blocked: &[bool], success: Option<&[bool]>) -> Result<Vec<f64>> {
    // h(x) = Pr_x[reach the success set or the kill channel before hitting
    // `blocked`], solved off the blocked set. The kill channel always
    // counts as success: the truncated two-set capacity is
    // Cap(A, B ∪ V_m^c) per the exhaustion identities.
    let n = chain.len();
    let mut unknown_of = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for x in 0..n {
        let fixed = blocked[x] || success.map(|s| s[x]).unwrap_or(false) || is_absorbing(chain, x);
        if !fixed {
            unknown_of[x] = unknowns.len();
            unknowns.push(x);
        }
    }
    let fixed_value = |x: usize| -> f64 {
        if blocked[x] {
            0.0
        } else if let Some(s) = success {
            if s[x] {
                1.0
            } else {
                1.0 // identified boundary: absorbed = escaped
            }
        } else {
            1.0 // kill channel is the success; absorbing boundary counts
        }
    };
    let m = unknowns.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = vec![0.0; m];
    for (r, &x) in unknowns.iter().enumerate() {
        let mut row = vec![(r, 1.0)];
        let mut b = chain.kill(x);
        for &(y, p) in chain.row(x) {
            if unknown_of[y] != usize::MAX {
                if y == x {
                    row[0].1 -= p;
                } else {
                    row.push((unknown_of[y], -p));
                }
            } else {
                b += p * fixed_value(y);
            }
        }
        rows.push(row);
        rhs[r] = b;
    }
    let sol = solve_sparse(m, &rows, &rhs)?;
    let mut h = vec![0.0; n];
    for x in 0..n {
        h[x] = if unknown_of[x] != usize::MAX {
            sol[unknown_of[x]]
        } else {
            fixed_value(x)
        };
    }
    Ok(h)
}

/// Cap(C) = Σ_{a∈C} π(a) Pr_a[T_C^+ = ∞], escape meaning the kill channel
/// (or identified boundary) of this truncation.
pub fn capacity_set(chain: &FiniteChain, pi: &Measure, targets: &[usize]) -> Result<f64> {
    capacity_set_with(chain, |i| pi.get(i), targets)
}

/// Cap(A,B) = Σ_{a∈A} π(a) Pr_a[T_A^+ > T_B]. On a killed truncation this
/// is the exhaustion object Cap(A, B ∪ V_m^c): escaping through the kill
/// channel counts toward the B side, so an unreachable B reduces to Cap(A).
pub fn capacity_between(
    chain: &FiniteChain,
    pi: &Measure,
    a_set: &[usize],
    b_set: &[usize],
) -> Result<f64> {
    let n = chain.len();
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for &a in a_set {
        in_a[a] = true;
    }
    for &b in b_set {
        if in_a[b] {
            return Err(Error::SetsOverlap);
        }
        in_b[b] = true;
    }
    let h = escape_value(chain, &in_a, Some(&in_b))?;
    let mut cap = 0.0;
    for &a in a_set {
        let mut hit = chain.kill(a);
        for &(y, p) in chain.row(a) {
            if in_b[y] {
                hit += p;
            } else if !in_a[y] {
                hit += p * h[y];
            }
        }
        cap += pi.get(a) * hit;
    }
    Ok(cap)
}

/// Monotone truncated-capacity sequence Cap(C, V_R^c) along a radius ladder.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityEstimate {
    pub targets: Vec<StateId>,
    pub radii: Vec<u64>,
    pub values: Vec<f64>,
}

impl CapacityEstimate {
    /// The last (smallest) truncated value: a rigorous upper bound.
    pub fn upper(&self) -> f64 {
        *self.values.last().expect("non-empty ladder")
    }

    pub fn monotonicity_violation(&self) -> f64 {
        self.values
            .windows(2)
            .fold(0.0f64, |m, w| m.max(w[1] - w[0]))
    }
}

pub fn capacity_profile(
    family: &ChainFamily,
    targets: &[StateId],
    radii: &[u64],
) -> Result<CapacityEstimate> {
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let chain = family.truncate(r, BoundaryMode::Killed)?;
        let idx: Vec<usize> = targets
            .iter()
            .map(|t| chain.require_index(*t))
            .collect::<Result<_>>()?;
        values.push(capacity_set_with(&chain, |i| family.pi_of(chain.state(i)), &idx)?);
    }
    Ok(CapacityEstimate { targets: targets.to_vec(), radii: radii.to_vec(), values })
}

/// Dirichlet energy Σ_e c(e) (f(x)-f(y))² + Σ_x ghost(x) f(x)², the ghost
/// term carrying edges to infinity where f vanishes.
pub fn dirichlet_energy(net: &Network, f: &[f64]) -> f64 {
    let mut e = 0.0;
    for (x, y, w) in net.edges() {
        let d = f[x] - f[y];
        e += w * d * d;
    }
    for x in 0..net.len() {
        e += net.ghost_weight(x) * f[x] * f[x];
    }
    e
}

/// Network capacity Cap(A; c): conductance from A to the ghost, via the
/// harmonic voltage. Zero when the network has no escape channel.
pub fn network_capacity(net: &Network, in_a: &[bool]) -> Result<f64> {
    if !net.has_ghost() {
        return Ok(0.0);
    }
    let v = network_voltage(net, in_a, None)?;
    Ok(flow_out(net, in_a, &v))
}

/// Cap(A, B; c): conductance from A to B with the ghost grounded (killed
/// walks count as failures, as in the chain-level definition).
pub fn network_capacity_between(net: &Network, in_a: &[bool], in_b: &[bool]) -> Result<f64> {
    let v = network_voltage_hitting(net, in_a, in_b)?;
    let mut cap = 0.0;
    for x in 0..net.len() {
        if !in_a[x] {
            continue;
        }
        for &(y, w) in net.neighbors(x) {
            if in_b[y] {
                cap += w;
            } else if !in_a[y] {
                cap += w * v[y];
            }
        }
    }
    Ok(cap)
}

/// Harmonic voltage with v = 1 on A, v = 0 on B (if given) and at the ghost.
/// Vertices with zero total weight (possible after underflow of tiny edge
/// weights) carry no current and are pinned to 0.
fn network_voltage(net: &Network, in_a: &[bool], in_b: Option<&[bool]>) -> Result<Vec<f64>> {
    let n = net.len();
    let mut unknown_of = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for x in 0..n {
        let fixed =
            in_a[x] || in_b.map(|b| b[x]).unwrap_or(false) || net.vertex_weight(x) < WEIGHT_FLOOR;
        if !fixed {
            unknown_of[x] = unknowns.len();
            unknowns.push(x);
        }
    }
    let m = unknowns.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = vec![0.0; m];
    for (r, &x) in unknowns.iter().enumerate() {
        let cx = net.vertex_weight(x);
        let mut row = vec![(r, cx)];
        let mut b = 0.0;
        for &(y, w) in net.neighbors(x) {
            if in_a[y] {
                b += w;
            } else if unknown_of[y] != usize::MAX {
                row.push((unknown_of[y], -w));
            }
        }
        rows.push(row);
        rhs[r] = b;
    }
    let sol = solve_sparse(m, &rows, &rhs)?;
    let mut v = vec![0.0; n];
    for x in 0..n {
        v[x] = if in_a[x] {
            1.0
        } else if unknown_of[x] != usize::MAX {
            sol[unknown_of[x]]
        } else {
            0.0
        };
    }
    Ok(v)
}

/// Pr_x[T_B before T_A and before the kill] as a network voltage.
fn network_voltage_hitting(net: &Network, in_a: &[bool], in_b: &[bool]) -> Result<Vec<f64>> {
    let n = net.len();
    let mut unknown_of = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for x in 0..n {
        if !in_a[x] && !in_b[x] && net.vertex_weight(x) >= WEIGHT_FLOOR {
            unknown_of[x] = unknowns.len();
            unknowns.push(x);
        }
    }
    let m = unknowns.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = vec![0.0; m];
    for (r, &x) in unknowns.iter().enumerate() {
        let cx = net.vertex_weight(x);
        let mut row = vec![(r, cx)];
        let mut b = 0.0;
        for &(y, w) in net.neighbors(x) {
            if in_b[y] {
                b += w;
            } else if unknown_of[y] != usize::MAX {
                row.push((unknown_of[y], -w));
            }
        }
        rows.push(row);
        rhs[r] = b;
    }
    let sol = solve_sparse(m, &rows, &rhs)?;
    let mut v = vec![0.0; n];
    for x in 0..n {
        if in_b[x] {
            v[x] = 1.0;
        } else if unknown_of[x] != usize::MAX {
            v[x] = sol[unknown_of[x]];
        }
    }
    Ok(v)
}

fn flow_out(net: &Network, in_a: &[bool], v: &[f64]) -> f64 {
    let mut cap = 0.0;
    for x in 0..net.len() {
        if !in_a[x] {
            continue;
        }
        for &(y, w) in net.neighbors(x) {
            if !in_a[y] {
                cap += w * (1.0 - v[y]);
            }
        }
        cap += net.ghost_weight(x);
    }
    cap
}

/// Variational capacity by direct energy minimization (coordinate descent
/// on the Dirichlet form). Independent of the probabilistic path: no
/// first-passage solve is involved, only downhill sweeps.
pub fn min_energy_capacity(
    net: &Network,
    in_a: &[bool],
    in_b: Option<&[bool]>,
) -> Result<f64> {
    if !net.has_ghost() && in_b.is_none() {
        return Ok(0.0);
    }
    let n = net.len();
    let mut f: Vec<f64> = (0..n).map(|x| if in_a[x] { 1.0 } else { 0.0 }).collect();
    let free: Vec<usize> = (0..n)
        .filter(|&x| !in_a[x] && !in_b.map(|b| b[x]).unwrap_or(false))
        .collect();
    let max_sweeps = 400_000usize;
    for _ in 0..max_sweeps {
        let mut delta: f64 = 0.0;
        for &x in &free {
            let cx = net.vertex_weight(x);
            if cx <= 0.0 {
                continue;
            }
            let mut s = 0.0;
            for &(y, w) in net.neighbors(x) {
                s += w * f[y];
            }
            let new = s / cx;
            delta = delta.max((new - f[x]).abs());
            f[x] = new;
        }
        if delta < 5e-15 {
            break;
        }
    }
    let mut energy = dirichlet_energy(net, &f);
    if let Some(b) = in_b {
        // edges into B carry (f-0)² already; nothing extra, but absorbing B
        // vertices must sit at 0
        for (x, bx) in b.iter().enumerate() {
            debug_assert!(!bx || f[x] == 0.0);
        }
    }
    // ghost term already included by dirichlet_energy
    if energy < 0.0 {
        energy = 0.0;
    }
    Ok(energy)
}

/// Effective resistance from A to the radius-R sphere inside the network,
/// ignoring ghost edges (pure graph resistance). Infinite when A cannot
/// reach the sphere inside the ball.
pub fn resistance_to_sphere(net: &Network, in_a: &[bool], radius: u64) -> Result<f64> {
    let n = net.len();
    let keep: Vec<bool> = (0..n)
        .map(|x| net.vertex(x).radius().map(|r| r <= radius).unwrap_or(false))
        .collect();
    let sub = net.restriction(&keep, false);
    let mut map_a = vec![false; sub.len()];
    let mut map_s = vec![false; sub.len()];
    let mut has_a = false;
    let mut has_s = false;
    for i in 0..sub.len() {
        let s = sub.vertex(i);
        let r = s.radius().unwrap_or(u64::MAX);
        let orig = net.index_of(s).unwrap();
        if in_a[orig] && r < radius {
            map_a[i] = true;
            has_a = true;
        } else if r == radius {
            map_s[i] = true;
            has_s = true;
        }
    }
    if !has_a {
        return Err(Error::EmptyTarget);
    }
    if !has_s {
        return Ok(f64::INFINITY);
    }
    // connectivity check: BFS from A over positive edges
    let mut seen = vec![false; sub.len()];
    let mut stack: Vec<usize> = (0..sub.len()).filter(|&i| map_a[i]).collect();
    for &s in &stack {
        seen[s] = true;
    }
    let mut touches = false;
    while let Some(x) = stack.pop() {
        if map_s[x] {
            touches = true;
        }
        for &(y, w) in sub.neighbors(x) {
            if w > 0.0 && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    if !touches {
        return Ok(f64::INFINITY);
    }
    let cap = network_capacity_between(&sub, &map_a, &map_s)?;
    if cap <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / cap)
}

/// The seven level sets of §-notation: A, V, W, U, Ŵ, Û and the pair set J,
/// decided against a (possibly bracketed) voltage field. Support queries use
/// the forward kernel of `chain`.
#[derive(Debug, Clone)]
pub struct LevelSets {
    pub delta: f64,
    pub a: Vec<usize>,
    pub v: Vec<usize>,
    pub w: Vec<usize>,
    pub u: Vec<usize>,
    pub w_hat: Vec<usize>,
    pub u_hat: Vec<usize>,
    pub j: Vec<(usize, usize)>,
}

pub fn level_sets(chain: &FiniteChain, volt: &VoltageField, delta: f64) -> Result<LevelSets> {
    assert!(delta > 0.0 && delta < 1.0);
    let n = chain.len();
    assert_eq!(volt.lower.len(), n);
    let mut above = vec![false; n];
    for x in 0..n {
        let (lo, up) = (volt.lower[x], volt.upper[x]);
        if lo == up && (lo - delta).abs() < 1e-12 {
            return Err(Error::DeltaCollision {
                state: chain.state(x),
                delta,
                gap: (lo - delta).abs(),
            });
        }
        if lo >= delta {
            above[x] = true;
        } else if up < delta {
            above[x] = false;
        } else {
            return Err(Error::BracketTooWide {
                state: chain.state(x),
                delta,
                lower: lo,
                upper: up,
            });
        }
    }
    let a: Vec<usize> = (0..n).filter(|&x| above[x]).collect();
    let v: Vec<usize> = (0..n).filter(|&x| !above[x]).collect();
    let w: Vec<usize> = a
        .iter()
        .copied()
        .filter(|&x| chain.row(x).iter().any(|&(y, p)| p > 0.0 && !above[y]))
        .collect();
    let mut in_u = vec![false; n];
    for &x in &w {
        for &(y, p) in chain.row(x) {
            if p > 0.0 && !above[y] {
                in_u[y] = true;
            }
        }
    }
    let u: Vec<usize> = (0..n).filter(|&x| in_u[x]).collect();
    // strict side of delta: the bracket is already fully on one side, so
    // lower > delta decides strictness
    let w_hat: Vec<usize> = w.iter().copied().filter(|&x| volt.lower[x] > delta).collect();
    let mut in_uh = vec![false; n];
    let mut j = Vec::new();
    for &x in &w_hat {
        for &(y, p) in chain.row(x) {
            if p > 0.0 && !above[y] {
                in_uh[y] = true;
                j.push((x, y));
            }
        }
    }
    let u_hat: Vec<usize> = (0..n).filter(|&x| in_uh[x]).collect();
    j.sort_unstable();
    j.dedup();
    Ok(LevelSets { delta, a, v, w, u, w_hat, u_hat, j })
}

/// Level sets for a chain family at one radius: direction `Reversed` builds
/// A_δ* from the reversed voltage with forward-kernel support queries.
pub fn family_level_sets(
    family: &ChainFamily,
    radius: u64,
    delta: f64,
    direction: Direction,
) -> Result<(FiniteChain, VoltageField, LevelSets)> {
    let (chain, volt) = voltage_bracket(family, radius, &[family.origin()], direction)?;
    let support = match direction {
        Direction::Reversed => chain.clone(),
        Direction::Forward => {
            let pi = family.measure_on(&chain)?;
            time_reversal(&chain, &pi)?
        }
    };
    let sets = level_sets(&support, &volt, delta)?;
    Ok((chain, volt, sets))
}
