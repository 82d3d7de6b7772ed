use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Identifier of a chain state. Line chains use `Int` levels, lattice chains
/// use `Pair` coordinates, subdivided chains add `Aux` states, and truncations
/// introduce the `Boundary` / `Cemetery` sentinels.
///
/// The derived ordering is what truncations sort states by, which keeps line
/// chains tridiagonal and lattice chains banded in the assembled systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateId {
    Int(i64),
    Pair(i32, i32),
    /// Inserted subdivision state; the owning chain maps the index back to
    /// the edge it subdivides.
    Aux(u32),
    /// Single identified boundary vertex of a truncation.
    Boundary,
    /// Absorbing cemetery of a killed truncation.
    Cemetery,
}

impl StateId {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            StateId::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(i32, i32)> {
        match self {
            StateId::Pair(x, y) => Some((*x, *y)),
            _ => None,
        }
    }

    /// Sup-norm distance from the origin of the ambient graph, used by
    /// ball predicates and resistance profiles.
    pub fn radius(&self) -> Option<u64> {
        match self {
            StateId::Int(i) => Some(i.unsigned_abs()),
            StateId::Pair(x, y) => Some(x.unsigned_abs().max(y.unsigned_abs()) as u64),
            _ => None,
        }
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateId::Int(i) => write!(f, "{i}"),
            StateId::Pair(x, y) => write!(f, "{x},{y}"),
            StateId::Aux(k) => write!(f, "z{k}"),
            StateId::Boundary => write!(f, "boundary"),
            StateId::Cemetery => write!(f, "cemetery"),
        }
    }
}

impl FromStr for StateId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boundary" => return Ok(StateId::Boundary),
            "cemetery" => return Ok(StateId::Cemetery),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix('z') {
            if let Ok(k) = rest.parse::<u32>() {
                return Ok(StateId::Aux(k));
            }
        }
        if let Some((a, b)) = s.split_once(',') {
            let x = a.parse::<i32>().map_err(|e| e.to_string())?;
            let y = b.parse::<i32>().map_err(|e| e.to_string())?;
            return Ok(StateId::Pair(x, y));
        }
        s.parse::<i64>().map(StateId::Int).map_err(|e| e.to_string())
    }
}
