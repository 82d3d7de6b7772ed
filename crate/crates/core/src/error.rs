use thiserror::Error;

use crate::state::StateId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation has empty interior")]
    EmptyInterior,
    #[error("origin {0} excluded by the truncation predicate")]
    OriginExcluded(StateId),
    #[error("state {0} not present in chain")]
    UnknownState(StateId),
    #[error("row of {state} sums to {sum}, outside tolerance")]
    RowSum { state: StateId, sum: f64 },
    #[error("measure must be positive at {0}")]
    NonPositiveMeasure(StateId),
    #[error("measure is not superstationary at {state} (excess {excess:.3e})")]
    NotSuperstationary { state: StateId, excess: f64 },
    #[error("chain is not stochastic (kill mass {kill:.3e} at {state}); supply the measure explicitly")]
    KilledChainMeasure { state: StateId, kill: f64 },
    #[error("chain is reducible: {0} cannot reach the origin class")]
    Reducible(StateId),
    #[error("stationary solve did not converge (residual {0:.3e})")]
    StationaryNonConvergence(f64),
    #[error("linear solve failed: {0}")]
    Solver(String),
    #[error("solve residual {0:.3e} above target")]
    SolverResidual(f64),
    #[error("target set is empty or unreachable")]
    EmptyTarget,
    #[error("sets must be disjoint")]
    SetsOverlap,
    #[error("delta {delta} collides with a voltage value at {state} (gap {gap:.3e})")]
    DeltaCollision { state: StateId, delta: f64, gap: f64 },
    #[error("voltage bracket too wide at {state} for delta {delta}: [{lower}, {upper}]")]
    BracketTooWide { state: StateId, delta: f64, lower: f64, upper: f64 },
    #[error("no evidence of transience: truncated capacity of the origin keeps shrinking ({head:.3e} -> {tail:.3e})")]
    NonTransient { head: f64, tail: f64 },
    #[error("effective resistance is infinite: {0}")]
    Disconnected(String),
    #[error("step budget exhausted after {steps} steps at level {level}")]
    BudgetExhausted { steps: u64, level: u64 },
    #[error("path too short for k = {k}: needs level {needed}, reached {reached}")]
    PathTooShort { k: u64, needed: u64, reached: u64 },
    #[error("path never hits the dyadic set")]
    NoDyadicVisit,
    #[error("conditioning levels invalid: ell {ell} must be below target {target}")]
    BadConditioning { ell: u64, target: u64 },
    #[error("{0} has no unique neighbor in the requested sphere")]
    NoRadialNeighbor(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
