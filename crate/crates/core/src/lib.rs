//! Simulation and computational potential theory for Markov chains:
//! explicit birth-and-death and planar spiral constructions, exact
//! voltage/Green/capacity solves on finite truncations, edge-subdivision
//! auxiliary chains, and trace-recurrence diagnostics.

pub mod bd;
pub mod chain;
pub mod error;
pub mod instances;
pub mod network;
pub mod potential;
pub mod solver;
pub mod spiral;
pub mod subdivision;
pub mod trace;

mod state;

pub use error::{Error, Result};
pub use state::StateId;
