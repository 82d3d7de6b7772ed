//! Undirected weighted networks with an optional ghost (escape) vertex.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::state::StateId;

/// Symmetric edge weights over an explicit vertex list. `ghost` weights are
/// edges to an implicit absorbing vertex standing for infinity; they take
/// part in vertex weights and capacity computations.
#[derive(Debug, Clone)]
pub struct Network {
    vertices: Vec<StateId>,
    index: HashMap<StateId, usize>,
    adj: Vec<Vec<(usize, f64)>>,
    ghost: Vec<f64>,
}

impl Network {
    pub fn new(vertices: Vec<StateId>) -> Network {
        let index = vertices.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let n = vertices.len();
        Network { vertices, index, adj: vec![Vec::new(); n], ghost: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[StateId] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> StateId {
        self.vertices[i]
    }

    pub fn index_of(&self, s: StateId) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn ghost_weight(&self, i: usize) -> f64 {
        self.ghost[i]
    }

    pub fn has_ghost(&self) -> bool {
        self.ghost.iter().any(|g| *g > 0.0)
    }

    /// Adds `w` to the symmetric weight of {x,y}.
    pub fn add_edge_weight(&mut self, x: usize, y: usize, w: f64) {
        debug_assert!(x != y && w >= 0.0);
        match self.adj[x].iter_mut().find(|(j, _)| *j == y) {
            Some((_, cur)) => *cur += w,
            None => self.adj[x].push((y, w)),
        }
        match self.adj[y].iter_mut().find(|(j, _)| *j == x) {
            Some((_, cur)) => *cur += w,
            None => self.adj[y].push((x, w)),
        }
    }

    pub fn add_ghost_weight(&mut self, x: usize, w: f64) {
        self.ghost[x] += w;
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.adj[x]
            .iter()
            .find_map(|(j, w)| (*j == y).then_some(*w))
            .unwrap_or(0.0)
    }

    /// c_v = Σ_w c(v,w), ghost edge included.
    pub fn vertex_weight(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|(_, w)| w).sum::<f64>() + self.ghost[v]
    }

    /// Undirected edge list, each edge once.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (x, row) in self.adj.iter().enumerate() {
            for &(y, w) in row {
                if x < y {
                    out.push((x, y, w));
                }
            }
        }
        out
    }

    /// Maximum |c(u,v) - c(v,u)| seen through both adjacency stores; should
    /// be 0 up to rounding by construction.
    pub fn symmetry_residual(&self) -> f64 {
        let mut res: f64 = 0.0;
        for (x, row) in self.adj.iter().enumerate() {
            for &(y, w) in row {
                res = res.max((w - self.weight(y, x)).abs());
            }
        }
        res
    }

    /// Restriction of the network to a vertex subset (paper-style c ↾ A):
    /// keeps edges with both endpoints inside. Ghost edges of kept vertices
    /// are preserved only when `keep_ghost` is set.
    pub fn restriction(&self, keep: &[bool], keep_ghost: bool) -> Network {
        let mut vertices = Vec::new();
        let mut map = vec![usize::MAX; self.len()];
        for (i, k) in keep.iter().enumerate() {
            if *k {
                map[i] = vertices.len();
                vertices.push(self.vertices[i]);
            }
        }
        let mut net = Network::new(vertices);
        for (x, y, w) in self.edges() {
            if keep[x] && keep[y] && w > 0.0 {
                net.add_edge_weight(map[x], map[y], w);
            }
        }
        if keep_ghost {
            for i in 0..self.len() {
                if keep[i] && self.ghost[i] > 0.0 {
                    net.add_ghost_weight(map[i], self.ghost[i]);
                }
            }
        }
        net
    }

    /// Walk kernel of the network: P(x,y) = c(x,y)/c_x, kill = ghost/c_x.
    pub fn walk_chain(&self, origin: StateId) -> Result<crate::chain::FiniteChain> {
        let n = self.len();
        let mut rows = vec![Vec::new(); n];
        let mut kill = vec![0.0; n];
        for x in 0..n {
            let cx = self.vertex_weight(x);
            if cx <= 0.0 {
                return Err(Error::Disconnected(format!(
                    "vertex {} has zero weight",
                    self.vertices[x]
                )));
            }
            for &(y, w) in &self.adj[x] {
                rows[x].push((y, w / cx));
            }
            kill[x] = self.ghost[x] / cx;
        }
        crate::chain::FiniteChain::from_rows(
            self.vertices.clone(),
            rows,
            kill,
            origin,
            crate::chain::BoundaryMode::Killed,
        )
    }

    /// Writes `u v weight` lines; ghost edges use the cemetery token.
    pub fn write_edges<W: Write>(&self, mut w: W) -> Result<()> {
        for (x, y, c) in self.edges() {
            writeln!(w, "{} {} {}", self.vertices[x], self.vertices[y], c)?;
        }
        for (x, g) in self.ghost.iter().enumerate() {
            if *g > 0.0 {
                writeln!(w, "{} {} {}", self.vertices[x], StateId::Cemetery, g)?;
            }
        }
        Ok(())
    }

    pub fn read_edges<R: BufRead>(r: R) -> Result<Network> {
        let mut triples: Vec<(StateId, StateId, f64)> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse { line: lineno + 1, msg: "expected `u v weight`".into() });
            }
            let u: StateId = fields[0]
                .parse()
                .map_err(|msg| Error::Parse { line: lineno + 1, msg })?;
            let v: StateId = fields[1]
                .parse()
                .map_err(|msg| Error::Parse { line: lineno + 1, msg })?;
            let w: f64 = fields[2]
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::Parse {
                    line: lineno + 1,
                    msg: e.to_string(),
                })?;
            triples.push((u, v, w));
        }
        let mut vertices: Vec<StateId> = triples
            .iter()
            .flat_map(|(u, v, _)| [*u, *v])
            .filter(|s| *s != StateId::Cemetery)
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut net = Network::new(vertices);
        for (u, v, w) in triples {
            if v == StateId::Cemetery {
                let x = net.index_of(u).unwrap();
                net.add_ghost_weight(x, w);
            } else if u == StateId::Cemetery {
                let y = net.index_of(v).unwrap();
                net.add_ghost_weight(y, w);
            } else {
                let x = net.index_of(u).unwrap();
                let y = net.index_of(v).unwrap();
                net.add_edge_weight(x, y, w);
            }
        }
        Ok(net)
    }
}
