//! Countable-state kernels, finite truncations, stationary measures,
//! time-reversal and additive symmetrization.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::state::StateId;

pub const ROW_SUM_TOL: f64 = 1e-12;

/// Lazy row access to a (possibly infinite) transition kernel. Rows must have
/// finite support and sum to 1 within `ROW_SUM_TOL`.
pub trait TransitionKernel {
    fn row(&self, x: StateId) -> Vec<(StateId, f64)>;
    fn origin(&self) -> StateId;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BoundaryMode {
    /// States outside the horizon collapse to an absorbing cemetery.
    Killed,
    /// States outside the horizon are identified to a single boundary vertex.
    Identified,
}

/// Explicit finite chain. Transitions to the cemetery are stored as the row
/// deficiency in `kill`; the cemetery itself is not a state. In `Identified`
/// mode the boundary vertex is an ordinary (absorbing) state.
#[derive(Debug, Clone)]
pub struct FiniteChain {
    states: Vec<StateId>,
    index: HashMap<StateId, usize>,
    rows: Vec<Vec<(usize, f64)>>,
    kill: Vec<f64>,
    origin: usize,
    mode: BoundaryMode,
}

impl FiniteChain {
    pub fn from_rows(
        states: Vec<StateId>,
        rows: Vec<Vec<(usize, f64)>>,
        kill: Vec<f64>,
        origin: StateId,
        mode: BoundaryMode,
    ) -> Result<Self> {
        assert_eq!(states.len(), rows.len());
        assert_eq!(states.len(), kill.len());
        let index: HashMap<StateId, usize> =
            states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let origin = *index.get(&origin).ok_or(Error::OriginExcluded(origin))?;
        let chain = FiniteChain { states, index, rows, kill, origin, mode };
        for i in 0..chain.len() {
            let sum: f64 = chain.rows[i].iter().map(|(_, p)| p).sum::<f64>() + chain.kill[i];
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::RowSum { state: chain.states[i], sum });
            }
        }
        Ok(chain)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn state(&self, i: usize) -> StateId {
        self.states[i]
    }

    pub fn index_of(&self, s: StateId) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn require_index(&self, s: StateId) -> Result<usize> {
        self.index_of(s).ok_or(Error::UnknownState(s))
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn kill(&self, i: usize) -> f64 {
        self.kill[i]
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x]
            .iter()
            .find_map(|(j, p)| (*j == y).then_some(*p))
            .unwrap_or(0.0)
    }

    /// Max over states of |row sum + kill − 1|.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let s: f64 = self.rows[i].iter().map(|(_, p)| p).sum::<f64>() + self.kill[i];
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Strips holding probabilities P(x,x) and renormalizes each row.
    pub fn strip_holding(&self) -> Result<FiniteChain> {
        let mut rows = Vec::with_capacity(self.len());
        let mut kill = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let hold: f64 = self.rows[i]
                .iter()
                .filter(|(j, _)| *j == i)
                .map(|(_, p)| p)
                .sum();
            if hold >= 1.0 - 1e-12 {
                // absorbing state (e.g. identified boundary): leave as-is
                rows.push(self.rows[i].clone());
                kill.push(self.kill[i]);
                continue;
            }
            let scale = 1.0 / (1.0 - hold);
            rows.push(
                self.rows[i]
                    .iter()
                    .filter(|(j, _)| *j != i)
                    .map(|(j, p)| (*j, p * scale))
                    .collect(),
            );
            kill.push(self.kill[i] * scale);
        }
        FiniteChain::from_rows(
            self.states.clone(),
            rows,
            kill,
            self.states[self.origin],
            self.mode,
        )
    }

    /// States reachable from the origin by positive-probability transitions.
    pub fn reachable_from_origin(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([self.origin]);
        seen[self.origin] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, p) in &self.rows[x] {
                if p > 0.0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Column-major view: for each y, the list of (x, P(x,y)).
    pub fn transposed_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.len()];
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                if p > 0.0 {
                    cols[y].push((x, p));
                }
            }
        }
        cols
    }

    /// Undirected support edges of G(X): pairs {x,y} with P(x,y)+P(y,x) > 0.
    pub fn support_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                if p > 0.0 && (x < y || self.prob(y, x) == 0.0) && x != y {
                    edges.push((x.min(y), x.max(y)));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn write_kernel<W: Write>(&self, mut w: W) -> Result<()> {
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                writeln!(w, "{} {} {}", self.states[x], self.states[y], p)?;
            }
            if self.kill[x] > 0.0 {
                writeln!(w, "{} {} {}", self.states[x], StateId::Cemetery, self.kill[x])?;
            }
        }
        Ok(())
    }

    /// Reads `x y prob` triples. Transitions to `cemetery` become kill mass.
    pub fn read_kernel<R: BufRead>(r: R, origin: StateId, mode: BoundaryMode) -> Result<Self> {
        let mut triples: Vec<(StateId, StateId, f64)> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse { line: lineno + 1, msg: "expected 3 fields".into() });
            }
            let x: StateId = fields[0]
                .parse()
                .map_err(|msg| Error::Parse { line: lineno + 1, msg })?;
            let y: StateId = fields[1]
                .parse()
                .map_err(|msg| Error::Parse { line: lineno + 1, msg })?;
            let p: f64 = fields[2]
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::Parse {
                    line: lineno + 1,
                    msg: e.to_string(),
                })?;
            triples.push((x, y, p));
        }
        let mut states: Vec<StateId> = triples
            .iter()
            .flat_map(|(x, y, _)| [*x, *y])
            .filter(|s| *s != StateId::Cemetery)
            .collect();
        states.sort_unstable();
        states.dedup();
        let index: HashMap<StateId, usize> =
            states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let n = states.len();
        let mut rows = vec![Vec::new(); n];
        let mut kill = vec![0.0; n];
        for (x, y, p) in triples {
            let xi = index[&x];
            if y == StateId::Cemetery {
                kill[xi] += p;
            } else {
                rows[xi].push((index[&y], p));
            }
        }
        FiniteChain::from_rows(states, rows, kill, origin, mode)
    }
}

/// Unnormalized per-state weights, with the stationarity residual recorded
/// when the measure was produced by (or checked against) a solve.
#[derive(Debug, Clone)]
pub struct Measure {
    pub weights: Vec<f64>,
    pub stationary_residual: Option<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Measure> {
        if let Some(i) = weights.iter().position(|w| *w <= 0.0 || !w.is_finite()) {
            return Err(Error::NonPositiveMeasure(StateId::Int(i as i64)));
        }
        Ok(Measure { weights, stationary_residual: None })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Evaluates a state-indexed weight function on a chain's states.
    pub fn from_fn(chain: &FiniteChain, f: impl Fn(StateId) -> f64) -> Result<Measure> {
        let weights: Vec<f64> = chain.states().iter().map(|s| f(*s)).collect();
        for (i, w) in weights.iter().enumerate() {
            if *w <= 0.0 || !w.is_finite() {
                return Err(Error::NonPositiveMeasure(chain.state(i)));
            }
        }
        Ok(Measure { weights, stationary_residual: None })
    }

    /// ‖πP − π‖∞ restricted to states with no kill and full inflow, i.e. the
    /// states where stationarity is meaningful on a truncation.
    pub fn stationarity_residual(&self, chain: &FiniteChain) -> f64 {
        let mut inflow = vec![0.0; chain.len()];
        for x in 0..chain.len() {
            for &(y, p) in chain.row(x) {
                inflow[y] += self.weights[x] * p;
            }
        }
        let mut res: f64 = 0.0;
        for y in 0..chain.len() {
            let excess = inflow[y] - self.weights[y];
            // superstationarity alone permits deficit; flag only excess inflow
            if excess > res {
                res = excess;
            }
        }
        res
    }

    /// Checks πP ≤ π entrywise (the killed-chain admissibility condition).
    pub fn check_superstationary(&self, chain: &FiniteChain, tol: f64) -> Result<()> {
        let mut inflow = vec![0.0; chain.len()];
        for x in 0..chain.len() {
            for &(y, p) in chain.row(x) {
                inflow[y] += self.weights[x] * p;
            }
        }
        for y in 0..chain.len() {
            let excess = inflow[y] - self.weights[y];
            if excess > tol * self.weights[y].max(1.0) {
                return Err(Error::NotSuperstationary { state: chain.state(y), excess });
            }
        }
        Ok(())
    }
}

/// Builds a finite truncation of `kernel`: the BFS closure of the origin
/// within `horizon`, with outside mass collapsed per `mode`.
pub fn truncate(
    kernel: &dyn TransitionKernel,
    horizon: impl Fn(StateId) -> bool,
    mode: BoundaryMode,
) -> Result<FiniteChain> {
    let o = kernel.origin();
    if !horizon(o) {
        return Err(Error::OriginExcluded(o));
    }
    let mut interior: Vec<StateId> = Vec::new();
    let mut seen: HashMap<StateId, ()> = HashMap::new();
    let mut queue = VecDeque::from([o]);
    seen.insert(o, ());
    while let Some(x) = queue.pop_front() {
        interior.push(x);
        for (y, p) in kernel.row(x) {
            if p > 0.0 && horizon(y) && !seen.contains_key(&y) {
                seen.insert(y, ());
                queue.push_back(y);
            }
        }
    }
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    interior.sort_unstable();
    let mut states = interior;
    if mode == BoundaryMode::Identified {
        states.push(StateId::Boundary);
    }
    let index: HashMap<StateId, usize> =
        states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let n = states.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut kill = vec![0.0; n];
    for (i, s) in states.iter().enumerate() {
        if *s == StateId::Boundary {
            rows[i].push((i, 1.0));
            continue;
        }
        let mut out = 0.0;
        for (y, p) in kernel.row(*s) {
            if p <= 0.0 {
                continue;
            }
            match index.get(&y) {
                Some(&j) => rows[i].push((j, p)),
                None => out += p,
            }
        }
        if out > 0.0 {
            match mode {
                BoundaryMode::Killed => kill[i] = out,
                BoundaryMode::Identified => rows[i].push((index[&StateId::Boundary], out)),
            }
        }
    }
    FiniteChain::from_rows(states, rows, kill, o, mode)
}

/// Solves πP = π on a finite stochastic chain, normalized so π(origin) = 1.
pub fn stationary_measure(chain: &FiniteChain) -> Result<Measure> {
    for i in 0..chain.len() {
        if chain.kill(i) > 1e-12 {
            return Err(Error::KilledChainMeasure { state: chain.state(i), kill: chain.kill(i) });
        }
    }
    let reach = chain.reachable_from_origin();
    if let Some(i) = reach.iter().position(|r| !r) {
        return Err(Error::Reducible(chain.state(i)));
    }
    let n = chain.len();
    // (P^T - I) π = 0 with the origin row replaced by the normalization π(o)=1
    let mut a = vec![0.0; n * n];
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            a[y * n + x] += p;
        }
    }
    for d in 0..n {
        a[d * n + d] -= 1.0;
    }
    let o = chain.origin();
    for x in 0..n {
        a[o * n + x] = if x == o { 1.0 } else { 0.0 };
    }
    let mut b = vec![0.0; n];
    b[o] = 1.0;
    let pi = crate::solver::dense_lu_solve(n, &mut a, &b)
        .map_err(|e| Error::StationaryNonConvergence(match e {
            Error::SolverResidual(r) => r,
            _ => f64::NAN,
        }))?;
    if pi.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
        return Err(Error::StationaryNonConvergence(f64::NAN));
    }
    let mut m = Measure::new(pi)?;
    m.stationary_residual = Some(m.stationarity_residual(chain));
    Ok(m)
}

/// P*(x,y) = π(y) P(y,x) / π(x). The kill of the reversal is the
/// superstationarity deficit μ(x)/π(x) with μ = π − πP.
pub fn time_reversal(chain: &FiniteChain, pi: &Measure) -> Result<FiniteChain> {
    pi.check_superstationary(chain, 1e-9)?;
    let n = chain.len();
    let cols = chain.transposed_rows();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut kill = vec![0.0; n];
    for x in 0..n {
        let mut mass = 0.0;
        for &(y, p) in &cols[x] {
            let q = pi.get(y) * p / pi.get(x);
            rows[x].push((y, q));
            mass += q;
        }
        kill[x] = (1.0 - mass).max(0.0);
    }
    FiniteChain::from_rows(
        chain.states().to_vec(),
        rows,
        kill,
        chain.state(chain.origin()),
        chain.mode(),
    )
}

/// Additive symmetrization network: c_s(x,y) = ½[π(x)P(x,y) + π(y)P(y,x)],
/// with ghost weight ½[π(x)·kill(x) + μ(x)] carrying the escape channel of
/// S = ½(P + P*). Vertex weights then satisfy c_x = π(x) exactly.
pub fn additive_symmetrization(chain: &FiniteChain, pi: &Measure) -> Result<Network> {
    pi.check_superstationary(chain, 1e-9)?;
    let n = chain.len();
    let mut inflow = vec![0.0; n];
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            inflow[y] += pi.get(x) * p;
        }
    }
    let mut net = Network::new(chain.states().to_vec());
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            if x == y {
                continue;
            }
            let w = 0.5 * pi.get(x) * p;
            if w > 0.0 {
                net.add_edge_weight(x, y, w);
            }
        }
        let mu = (pi.get(x) - inflow[x]).max(0.0);
        let ghost = 0.5 * (pi.get(x) * chain.kill(x) + mu);
        if ghost > 0.0 {
            net.add_ghost_weight(x, ghost);
        }
    }
    Ok(net)
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ValidationReport {
    pub row_sum_violations: Vec<(StateId, f64)>,
    pub negative_entries: Vec<(StateId, StateId, f64)>,
    pub unreachable: Vec<StateId>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.row_sum_violations.is_empty()
            && self.negative_entries.is_empty()
            && self.unreachable.is_empty()
    }
}

/// Diagnostic pass over a chain; reports, never mutates.
pub fn validate(chain: &FiniteChain) -> ValidationReport {
    let mut report = ValidationReport::default();
    for i in 0..chain.len() {
        let sum: f64 = chain.row(i).iter().map(|(_, p)| p).sum::<f64>() + chain.kill(i);
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            report.row_sum_violations.push((chain.state(i), sum));
        }
        for &(j, p) in chain.row(i) {
            if p < 0.0 {
                report.negative_entries.push((chain.state(i), chain.state(j), p));
            }
        }
    }
    let reach = chain.reachable_from_origin();
    for (i, ok) in reach.iter().enumerate() {
        if !ok {
            report.unreachable.push(chain.state(i));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bd::BdWeights;
    use crate::instances::bd_kernel;

    fn cycle3() -> FiniteChain {
        let states = vec![StateId::Int(0), StateId::Int(1), StateId::Int(2)];
        let rows = vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]];
        FiniteChain::from_rows(states, rows, vec![0.0; 3], StateId::Int(0), BoundaryMode::Killed)
            .unwrap()
    }

    #[test]
    fn truncate_biased_line_killed_mass_conserved() {
        let w = BdWeights::geometric(2.0);
        let chain = truncate(
            &bd_kernel(&w),
            |s| s.as_int().map(|i| i <= 8).unwrap_or(false),
            BoundaryMode::Killed,
        )
        .unwrap();
        assert_eq!(chain.len(), 9);
        assert!(chain.row_sum_residual() <= ROW_SUM_TOL);
        assert!(chain.kill(chain.require_index(StateId::Int(8)).unwrap()) > 0.0);
    }

    #[test]
    fn truncate_rejects_excluded_origin() {
        let w = BdWeights::geometric(2.0);
        let err = truncate(&bd_kernel(&w), |_| false, BoundaryMode::Killed).unwrap_err();
        assert!(matches!(err, Error::OriginExcluded(_)));
    }

    #[test]
    fn truncate_srw_identified_boundary_row() {
        let chain = truncate(
            &crate::instances::BiasedZKernel::new(0.5),
            |s| s.as_int().map(|i| i.abs() <= 3).unwrap_or(false),
            BoundaryMode::Identified,
        )
        .unwrap();
        let three = chain.require_index(StateId::Int(3)).unwrap();
        let b = chain.require_index(StateId::Boundary).unwrap();
        assert!((chain.prob(three, b) - 0.5).abs() < 1e-15);
        assert!((chain.prob(b, b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bd_stationary_closed_form() {
        let w = BdWeights::geometric(2.0);
        assert!((w.pi(0) - 1.0).abs() < 1e-12);
        for i in 1..20u64 {
            let expect = 3.0 * 2f64.powi(i as i32 - 1);
            assert!((w.pi(i) - expect).abs() < 1e-9 * expect);
        }
    }

    #[test]
    fn cycle_stationary_uniform_and_reversal_reverses() {
        let chain = cycle3();
        let pi = stationary_measure(&chain).unwrap();
        assert!((pi.get(0) - pi.get(1)).abs() < 1e-12);
        assert!((pi.get(1) - pi.get(2)).abs() < 1e-12);
        assert!(pi.stationary_residual.unwrap() < 1e-12);

        let rev = time_reversal(&chain, &pi).unwrap();
        assert!((rev.prob(0, 2) - 1.0).abs() < 1e-12);
        assert!((rev.prob(2, 1) - 1.0).abs() < 1e-12);

        // involution
        let back = time_reversal(&rev, &pi).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert!((back.prob(x, y) - chain.prob(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reversible_bd_reversal_is_identity() {
        let w = BdWeights::geometric(2.0);
        let chain = truncate(
            &bd_kernel(&w),
            |s| s.as_int().map(|i| i <= 6).unwrap_or(false),
            BoundaryMode::Killed,
        )
        .unwrap();
        let pi = Measure::from_fn(&chain, |s| w.pi(s.as_int().unwrap() as u64)).unwrap();
        let rev = time_reversal(&chain, &pi).unwrap();
        for x in 0..chain.len() {
            for y in 0..chain.len() {
                assert!((rev.prob(x, y) - chain.prob(x, y)).abs() < 1e-12);
            }
            assert!((rev.kill(x) - chain.kill(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrization_cycle_gives_sixth_weights() {
        let chain = cycle3();
        let pi = Measure::new(vec![1.0 / 3.0; 3]).unwrap();
        let net = additive_symmetrization(&chain, &pi).unwrap();
        for (x, y) in [(0, 1), (1, 2), (0, 2)] {
            assert!((net.weight(x, y) - 1.0 / 6.0).abs() < 1e-15);
        }
        // induced walk kernel is ½(P+P*)
        for x in 0..3 {
            let cx: f64 = net.vertex_weight(x);
            assert!((cx - pi.get(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetrization_of_biased_walk_with_counting_measure_is_srw() {
        let chain = truncate(
            &crate::instances::BiasedZKernel::new(2.0 / 3.0),
            |s| s.as_int().map(|i| i.abs() <= 5).unwrap_or(false),
            BoundaryMode::Killed,
        )
        .unwrap();
        let pi = Measure::from_fn(&chain, |_| 1.0).unwrap();
        let net = additive_symmetrization(&chain, &pi).unwrap();
        for i in -5i64..5 {
            let x = chain.require_index(StateId::Int(i)).unwrap();
            let y = chain.require_index(StateId::Int(i + 1)).unwrap();
            assert!((net.weight(x, y) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn validate_flags_bad_rows_and_isolated_states() {
        let chain = cycle3();
        assert!(validate(&chain).is_clean());

        let states = vec![StateId::Int(0), StateId::Int(1), StateId::Int(2)];
        let rows = vec![vec![(1, 0.99)], vec![(0, 1.0)], vec![(2, 1.0)]];
        let bad = FiniteChain {
            states: states.clone(),
            index: states.iter().enumerate().map(|(i, s)| (*s, i)).collect(),
            rows,
            kill: vec![0.0; 3],
            origin: 0,
            mode: BoundaryMode::Killed,
        };
        let report = validate(&bad);
        assert_eq!(report.row_sum_violations.len(), 1);
        assert_eq!(report.unreachable, vec![StateId::Int(2)]);
    }

    #[test]
    fn kernel_file_roundtrip() {
        let w = BdWeights::geometric(2.0);
        let chain = truncate(
            &bd_kernel(&w),
            |s| s.as_int().map(|i| i <= 4).unwrap_or(false),
            BoundaryMode::Killed,
        )
        .unwrap();
        let mut buf = Vec::new();
        chain.write_kernel(&mut buf).unwrap();
        let back =
            FiniteChain::read_kernel(&buf[..], StateId::Int(0), BoundaryMode::Killed).unwrap();
        assert_eq!(back.len(), chain.len());
        for x in 0..chain.len() {
            for y in 0..chain.len() {
                assert!((back.prob(x, y) - chain.prob(x, y)).abs() < 1e-15);
            }
            assert!((back.kill(x) - chain.kill(x)).abs() < 1e-15);
        }
    }
}
