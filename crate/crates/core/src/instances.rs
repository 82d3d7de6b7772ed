//! Chain kernels and instance generators used across the toolkit: line and
//! lattice kernels, the standard transient families, exact-tail killed
//! truncations, and the random instances behind the property harnesses.

use rand::Rng;

use crate::bd::BdWeights;
use crate::chain::{truncate, BoundaryMode, FiniteChain, Measure, TransitionKernel};
use crate::error::{Error, Result};
use crate::state::StateId;

/// Birth-and-death kernel on Z_+ levels.
#[derive(Debug, Clone)]
pub struct BdKernel {
    weights: BdWeights,
}

pub fn bd_kernel(w: &BdWeights) -> BdKernel {
    BdKernel { weights: w.clone() }
}

impl TransitionKernel for BdKernel {
    fn row(&self, x: StateId) -> Vec<(StateId, f64)> {
        let i = x.as_int().expect("BD kernel expects Int states");
        assert!(i >= 0);
        let i = i as u64;
        let up = self.weights.up_prob(i);
        if i == 0 {
            vec![(StateId::Int(1), 1.0)]
        } else {
            vec![
                (StateId::Int(i as i64 + 1), up),
                (StateId::Int(i as i64 - 1), 1.0 - up),
            ]
        }
    }

    fn origin(&self) -> StateId {
        StateId::Int(0)
    }
}

/// Nearest-neighbor walk on Z moving right with probability p. With the
/// counting measure it is the standard non-reversible instance; its additive
/// symmetrization w.r.t. that measure is SRW on Z.
#[derive(Debug, Clone)]
pub struct BiasedZKernel {
    pub p: f64,
}

impl BiasedZKernel {
    pub fn new(p: f64) -> Self {
        assert!(p > 0.0 && p < 1.0);
        BiasedZKernel { p }
    }
}

impl TransitionKernel for BiasedZKernel {
    fn row(&self, x: StateId) -> Vec<(StateId, f64)> {
        let i = x.as_int().expect("Z kernel expects Int states");
        vec![
            (StateId::Int(i + 1), self.p),
            (StateId::Int(i - 1), 1.0 - self.p),
        ]
    }

    fn origin(&self) -> StateId {
        StateId::Int(0)
    }
}

/// Non-reversible twist of a BD chain: state (i, c) moves the level like the
/// BD chain while c advances deterministically mod 3, so no transition can
/// be retraced. π(i, c) = π_bd(i) is stationary.
#[derive(Debug, Clone)]
pub struct HelixKernel {
    weights: BdWeights,
}

impl HelixKernel {
    pub fn new(w: &BdWeights) -> Self {
        HelixKernel { weights: w.clone() }
    }

    pub fn pi(&self, s: StateId) -> f64 {
        let (i, _) = s.as_pair().expect("helix state");
        self.weights.pi(i as u64)
    }
}

impl TransitionKernel for HelixKernel {
    fn row(&self, x: StateId) -> Vec<(StateId, f64)> {
        let (i, c) = x.as_pair().expect("helix kernel expects Pair states");
        assert!(i >= 0);
        let up = self.weights.up_prob(i as u64);
        let c2 = (c + 1) % 3;
        if i == 0 {
            vec![(StateId::Pair(1, c2), 1.0)]
        } else {
            vec![
                (StateId::Pair(i + 1, c2), up),
                (StateId::Pair(i - 1, c2), 1.0 - up),
            ]
        }
    }

    fn origin(&self) -> StateId {
        StateId::Pair(0, 0)
    }
}

/// A chain family: a kernel together with its analytic stationary measure
/// and a ball predicate, from which truncation ladders are built.
pub struct ChainFamily {
    pub name: String,
    kernel: Box<dyn TransitionKernel + Send + Sync>,
    pi: Box<dyn Fn(StateId) -> f64 + Send + Sync>,
}

impl ChainFamily {
    pub fn new(
        name: impl Into<String>,
        kernel: Box<dyn TransitionKernel + Send + Sync>,
        pi: Box<dyn Fn(StateId) -> f64 + Send + Sync>,
    ) -> Self {
        ChainFamily { name: name.into(), kernel, pi }
    }

    pub fn kernel(&self) -> &dyn TransitionKernel {
        self.kernel.as_ref()
    }

    pub fn origin(&self) -> StateId {
        self.kernel.origin()
    }

    /// Killed (or identified) truncation to the radius-R ball.
    pub fn truncate(&self, radius: u64, mode: BoundaryMode) -> Result<FiniteChain> {
        truncate(
            self.kernel.as_ref(),
            |s| s.radius().map(|r| r <= radius).unwrap_or(false),
            mode,
        )
    }

    pub fn measure_on(&self, chain: &FiniteChain) -> Result<Measure> {
        Measure::from_fn(chain, |s| {
            if s == StateId::Boundary {
                1.0 // placeholder weight; boundary is absorbing
            } else {
                (self.pi)(s)
            }
        })
    }

    /// The measure as a function, for callers assembling their own chains.
    pub fn pi_of(&self, s: StateId) -> f64 {
        (self.pi)(s)
    }
}

pub fn two_pow_family() -> ChainFamily {
    let w = BdWeights::geometric(2.0);
    let pi_w = w.clone();
    ChainFamily::new(
        "bd:2pow",
        Box::new(bd_kernel(&w)),
        Box::new(move |s| pi_w.pi(s.as_int().unwrap() as u64)),
    )
}

pub fn three_halves_family() -> ChainFamily {
    let w = BdWeights::geometric(1.5);
    let pi_w = w.clone();
    ChainFamily::new(
        "bd:3halves",
        Box::new(bd_kernel(&w)),
        Box::new(move |s| pi_w.pi(s.as_int().unwrap() as u64)),
    )
}

pub fn biased_z_family(p: f64) -> ChainFamily {
    ChainFamily::new(
        format!("biased:{p}"),
        Box::new(BiasedZKernel::new(p)),
        Box::new(|_| 1.0),
    )
}

pub fn helix_family(w: &BdWeights) -> ChainFamily {
    let k = HelixKernel::new(w);
    let pi_k = k.clone();
    ChainFamily::new(
        format!("helix:{}", w.tag),
        Box::new(k),
        Box::new(move |s| pi_k.pi(s)),
    )
}

/// The three standard transient instances used by the verification
/// harnesses: two reversible geometric chains and the biased walk on Z.
pub fn standard_families() -> Vec<ChainFamily> {
    vec![two_pow_family(), three_halves_family(), biased_z_family(2.0 / 3.0)]
}

/// Killed truncation of a BD chain at level R with the infinite tail
/// collapsed to an exact escape edge of conductance 1/r(R), r(R) the tail
/// resistance. Voltages and Green values of states ≤ R agree with the
/// infinite chain exactly; π(R) becomes ω(R-1,R) + 1/r(R).
pub fn killed_bd_exact_tail(w: &BdWeights, r: u64) -> Result<(FiniteChain, Measure)> {
    let tail = w
        .tail_resistance_exact(r)
        .ok_or_else(|| Error::Config(format!("no exact tail resistance for {}", w.tag)))?;
    let kappa = 1.0 / tail;
    let n = (r + 1) as usize;
    let states: Vec<StateId> = (0..=r).map(|i| StateId::Int(i as i64)).collect();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut kill = vec![0.0; n];
    for i in 0..=r {
        if i == 0 {
            rows.push(vec![(1, 1.0)]);
        } else if i < r {
            let up = w.up_prob(i);
            rows.push(vec![(i as usize + 1, up), (i as usize - 1, 1.0 - up)]);
        } else {
            let down = w.weight(r - 1);
            let total = down + kappa;
            rows.push(vec![(r as usize - 1, down / total)]);
            kill[r as usize] = kappa / total;
        }
    }
    let chain = FiniteChain::from_rows(states, rows, kill, StateId::Int(0), BoundaryMode::Killed)?;
    let pi = Measure::from_fn(&chain, |s| {
        let i = s.as_int().unwrap() as u64;
        if i == r {
            w.weight(r - 1) + kappa
        } else {
            w.pi(i)
        }
    })?;
    Ok((chain, pi))
}

/// Random irreducible stochastic chain on n states: a backbone cycle keeps
/// it irreducible, extra random transitions make it non-reversible.
pub fn random_irreducible_chain(rng: &mut impl Rng, n: usize) -> FiniteChain {
    assert!(n >= 2);
    let states: Vec<StateId> = (0..n).map(|i| StateId::Int(i as i64)).collect();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for x in 0..n {
        let mut mass = vec![0.0; n];
        mass[(x + 1) % n] += rng.gen_range(0.2..1.0);
        let extras = rng.gen_range(1..=3usize);
        for _ in 0..extras {
            let y = rng.gen_range(0..n);
            if y != x {
                mass[y] += rng.gen_range(0.05..1.0);
            }
        }
        let total: f64 = mass.iter().sum();
        rows.push(
            mass.iter()
                .enumerate()
                .filter(|(_, m)| **m > 0.0)
                .map(|(y, m)| (y, m / total))
                .collect(),
        );
    }
    FiniteChain::from_rows(states, rows, vec![0.0; n], StateId::Int(0), BoundaryMode::Killed)
        .expect("rows normalized")
}

/// Random connected reversible network with ghost (escape) edges on a
/// random subset of vertices; the walk is killed through the ghost edges.
pub fn random_reversible_network(rng: &mut impl Rng, n: usize) -> crate::network::Network {
    assert!(n >= 2);
    let vertices: Vec<StateId> = (0..n).map(|i| StateId::Int(i as i64)).collect();
    let mut net = crate::network::Network::new(vertices);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        net.add_edge_weight(u, v, rng.gen_range(0.2..2.0));
    }
    let extras = rng.gen_range(0..=n);
    for _ in 0..extras {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && net.weight(u, v) == 0.0 {
            net.add_edge_weight(u, v, rng.gen_range(0.2..2.0));
        }
    }
    let leaks = rng.gen_range(1..=(n / 2).max(1));
    for _ in 0..leaks {
        let v = rng.gen_range(0..n);
        net.add_ghost_weight(v, rng.gen_range(0.1..1.0));
    }
    if !net.has_ghost() {
        net.add_ghost_weight(rng.gen_range(0..n), 0.5);
    }
    net
}

/// Random killed (substochastic) chain with a compatible superstationary
/// measure: rows leak mass and π is μ(I - P)^{-1} for a random positive μ,
/// which makes π - πP = μ ≥ 0 exact. Every state is reachable from the
/// origin and can reach the kill channel.
pub fn random_killed_chain(rng: &mut impl Rng, n: usize) -> (FiniteChain, Measure) {
    assert!(n >= 3);
    let states: Vec<StateId> = (0..n).map(|i| StateId::Int(i as i64)).collect();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut kill = vec![0.0; n];
    for x in 0..n {
        let mut mass = vec![0.0; n];
        // forward backbone keeps all states reachable from the origin
        mass[(x + 1) % n] += rng.gen_range(0.3..1.0);
        for _ in 0..rng.gen_range(1..=3usize) {
            let y = rng.gen_range(0..n);
            if y != x {
                mass[y] += rng.gen_range(0.05..0.8);
            }
        }
        let leak = if x == n - 1 {
            rng.gen_range(0.2..0.5)
        } else if rng.gen_bool(0.4) {
            rng.gen_range(0.05..0.35)
        } else {
            0.0
        };
        let total: f64 = mass.iter().sum::<f64>() / (1.0 - leak);
        rows.push(
            mass.iter()
                .enumerate()
                .filter(|(_, m)| **m > 0.0)
                .map(|(y, m)| (y, m / total))
                .collect(),
        );
        kill[x] = leak;
    }
    let chain =
        FiniteChain::from_rows(states, rows, kill, StateId::Int(0), BoundaryMode::Killed)
            .expect("rows normalized");
    // π = μ (I - P)^{-1} via the transposed solve (I - P)^T π = μ
    let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut a = vec![0.0; n * n];
    for d in 0..n {
        a[d * n + d] = 1.0;
    }
    for x in 0..n {
        for &(y, p) in chain.row(x) {
            a[y * n + x] -= p;
        }
    }
    let pi = crate::solver::dense_lu_solve(n, &mut a, &mu).expect("I - P invertible");
    let measure = Measure::new(pi).expect("positive measure");
    measure
        .check_superstationary(&chain, 1e-9)
        .expect("construction guarantees superstationarity");
    (chain, measure)
}
