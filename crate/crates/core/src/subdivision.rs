//! The edge-subdivision auxiliary chain: J-edges between the strict level
//! sets get an inserted state z_{a,b} so that the reversed voltage on the
//! inserted layer is exactly δ, with the induced V-skeleton of the new chain
//! equal to the original chain.
//!
//! Input chains are finite and killed (the cemetery emulates escape to
//! infinity), with an explicit superstationary measure, so every verified
//! property is an exact linear-algebra identity.

use serde::Serialize;

use crate::chain::{time_reversal, BoundaryMode, FiniteChain, Measure};
use crate::error::{Error, Result};
use crate::potential::{self, hitting_voltage, LevelSets, VoltageField};
use crate::state::StateId;

/// δ-level data of a killed chain: exact reversed voltages, the seven sets,
/// and the exceptional set D of Ŵ-states with no usable J-partner under P*.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub delta: f64,
    pub vstar: Vec<f64>,
    pub sets: LevelSets,
    pub d: Vec<usize>,
}

impl LevelData {
    pub fn j_pairs(&self) -> &[(usize, usize)] {
        &self.sets.j
    }
}

/// Strips holding probabilities and adjusts the measure to
/// π'(x) = π(x)(1 − P(x,x)), which preserves superstationarity.
fn prepare(chain: &FiniteChain, pi: &Measure) -> Result<(FiniteChain, Measure)> {
    let mut has_holding = false;
    for x in 0..chain.len() {
        let hold = chain.prob(x, x);
        if hold >= 1.0 - 1e-12 {
            return Err(Error::Config(format!(
                "absorbing state {} not allowed in subdivision input",
                chain.state(x)
            )));
        }
        if hold > 0.0 {
            has_holding = true;
        }
    }
    if !has_holding {
        return Ok((chain.clone(), pi.clone()));
    }
    let stripped = chain.strip_holding()?;
    let weights: Vec<f64> = (0..chain.len())
        .map(|x| pi.get(x) * (1.0 - chain.prob(x, x)))
        .collect();
    Ok((stripped, Measure::new(weights)?))
}

pub fn level_data(chain: &FiniteChain, pi: &Measure, delta: f64) -> Result<LevelData> {
    let (base, base_pi) = prepare(chain, pi)?;
    base_pi.check_superstationary(&base, 1e-9)?;
    let rev = time_reversal(&base, &base_pi)?;
    let vstar = hitting_voltage(&rev, &[base.origin()], 0.0)?;
    for x in 0..base.len() {
        if (vstar[x] - delta).abs() < 1e-12 {
            return Err(Error::DeltaCollision {
                state: base.state(x),
                delta,
                gap: (vstar[x] - delta).abs(),
            });
        }
    }
    let volt = VoltageField::exact(&base, vstar.clone(), vec![base.state(base.origin())], 0);
    let sets = potential::level_sets(&base, &volt, delta)?;
    // D: Ŵ-states with no J-partner reachable under P*
    let d: Vec<usize> = sets
        .w_hat
        .iter()
        .copied()
        .filter(|&a| {
            !sets
                .j
                .iter()
                .any(|&(ja, jb)| ja == a && base.prob(jb, a) > 0.0)
        })
        .collect();
    Ok(LevelData { delta, vstar, sets, d })
}

/// The subdivided chain: states V ∪ Z with forward and reversed kernels,
/// the stationary measure π̂ and the return weights β_u.
#[derive(Debug)]
pub struct AuxChain {
    pub base: FiniteChain,
    pub base_pi: Measure,
    pub level: LevelData,
    /// z index k (state `Aux(k)`) subdivides the pair `z_pairs[k] = (a, b)`.
    pub z_pairs: Vec<(usize, usize)>,
    pub forward: FiniteChain,
    pub reversed: FiniteChain,
    pub pi_hat: Measure,
    pub beta: Vec<f64>,
    /// L(a) normalizers of the modified rows (None when untouched).
    pub l_values: Vec<Option<f64>>,
}

impl AuxChain {
    pub fn n_base(&self) -> usize {
        self.base.len()
    }

    pub fn z_state(&self, k: usize) -> StateId {
        StateId::Aux(k as u32)
    }

    pub fn export_json(&self) -> serde_json::Value {
        let j: Vec<[String; 2]> = self
            .z_pairs
            .iter()
            .map(|&(a, b)| [self.base.state(a).to_string(), self.base.state(b).to_string()])
            .collect();
        let d: Vec<String> = self
            .level
            .d
            .iter()
            .map(|&x| self.base.state(x).to_string())
            .collect();
        let z_labels: Vec<String> = (0..self.z_pairs.len())
            .map(|k| self.z_state(k).to_string())
            .collect();
        serde_json::json!({
            "delta": self.level.delta,
            "j": j,
            "d": d,
            "z": z_labels,
            "pi_hat": self.pi_hat.weights,
            "beta": self.beta,
        })
    }
}

/// Builds the auxiliary chain per the subdivision rule: the reversed kernel
/// is constructed first (z-rows by the δ-interpolation, modified Ŵ/Û rows by
/// ratio preservation and row normalization), π̂ by the return-weight
/// inflation, and the forward kernel as the π̂-dual.
pub fn build_aux(chain: &FiniteChain, pi: &Measure, delta: f64) -> Result<AuxChain> {
    let (base, base_pi) = prepare(chain, pi)?;
    let level = {
        // recompute on the prepared chain so indices line up
        let rev = time_reversal(&base, &base_pi)?;
        let vstar = hitting_voltage(&rev, &[base.origin()], 0.0)?;
        for x in 0..base.len() {
            if (vstar[x] - delta).abs() < 1e-12 {
                return Err(Error::DeltaCollision {
                    state: base.state(x),
                    delta,
                    gap: (vstar[x] - delta).abs(),
                });
            }
        }
        let volt = VoltageField::exact(&base, vstar.clone(), vec![base.state(base.origin())], 0);
        let sets = potential::level_sets(&base, &volt, delta)?;
        let d: Vec<usize> = sets
            .w_hat
            .iter()
            .copied()
            .filter(|&a| !sets.j.iter().any(|&(ja, jb)| ja == a && base.prob(jb, a) > 0.0))
            .collect();
        LevelData { delta, vstar, sets, d }
    };
    let rev = time_reversal(&base, &base_pi)?;
    let n = base.len();
    let z_pairs: Vec<(usize, usize)> = level.sets.j.clone();
    let nz = z_pairs.len();
    let total = n + nz;
    let vstar = &level.vstar;

    // P̂*(z_{a,b}, a) = (δ - v*(b)) / (v*(a) - v*(b)), the rest to b
    let z_to_a: Vec<f64> = z_pairs
        .iter()
        .map(|&(a, b)| (delta - vstar[b]) / (vstar[a] - vstar[b]))
        .collect();
    for (k, &(a, b)) in z_pairs.iter().enumerate() {
        let p = z_to_a[k];
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!(
                "subdivision probability {} outside (0,1) for pair ({}, {})",
                p,
                base.state(a),
                base.state(b)
            )));
        }
    }
    let z_index_of_pair = |a: usize, b: usize| -> Option<usize> {
        z_pairs.iter().position(|&(x, y)| (x, y) == (a, b))
    };

    let mut in_w_hat = vec![false; n];
    for &a in &level.sets.w_hat {
        in_w_hat[a] = true;
    }
    let mut in_u_hat = vec![false; n];
    for &b in &level.sets.u_hat {
        in_u_hat[b] = true;
    }
    let mut in_d = vec![false; n];
    for &a in &level.d {
        in_d[a] = true;
    }

    let mut rows_star: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
    let mut kill_star = vec![0.0; total];
    let mut l_values: Vec<Option<f64>> = vec![None; n];

    for (k, &(a, b)) in z_pairs.iter().enumerate() {
        rows_star[n + k] = vec![(a, z_to_a[k]), (b, 1.0 - z_to_a[k])];
    }

    for x in 0..n {
        let untouched = (!in_w_hat[x] && !in_u_hat[x]) || in_d[x];
        if untouched {
            rows_star[x] = rev.row(x).to_vec();
            kill_star[x] = rev.kill(x);
            continue;
        }
        if in_w_hat[x] {
            // a-row: J-partners are the y with (a, y) ∈ J
            let a = x;
            let mut l = rev.kill(a);
            let mut entries: Vec<(usize, f64, Option<usize>)> = Vec::new();
            for &(y, pstar) in rev.row(a) {
                if pstar <= 0.0 {
                    continue;
                }
                match z_index_of_pair(a, y) {
                    Some(k) => {
                        let rho = 1.0 - z_to_a[k]; // P̂*(z_{a,y}, y)
                        l += pstar / rho;
                        entries.push((n + k, pstar / rho, Some(k)));
                    }
                    None => {
                        l += pstar;
                        entries.push((y, pstar, None));
                    }
                }
            }
            l_values[a] = Some(l);
            for (target, mass, _) in entries {
                rows_star[a].push((target, mass / l));
            }
            kill_star[a] = rev.kill(a) / l;
        } else {
            // b-row: J-partners are the y with (y, b) ∈ J
            let b = x;
            let mut l = rev.kill(b);
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for &(y, pstar) in rev.row(b) {
                if pstar <= 0.0 {
                    continue;
                }
                match z_index_of_pair(y, b) {
                    Some(k) => {
                        let rho = z_to_a[k]; // P̂*(z_{y,b}, y)
                        l += pstar / rho;
                        entries.push((n + k, pstar / rho));
                    }
                    None => {
                        l += pstar;
                        entries.push((y, pstar));
                    }
                }
            }
            l_values[b] = Some(l);
            for (target, mass) in entries {
                rows_star[b].push((target, mass / l));
            }
            kill_star[b] = rev.kill(b) / l;
        }
    }

    let mut states: Vec<StateId> = base.states().to_vec();
    for k in 0..nz {
        states.push(StateId::Aux(k as u32));
    }
    let reversed = FiniteChain::from_rows(
        states.clone(),
        rows_star,
        kill_star,
        base.state(base.origin()),
        BoundaryMode::Killed,
    )?;

    // β_u = Σ_z P̂*(u,z) P̂*(z,u) = 1 - 1/L(u) on modified rows
    let mut beta = vec![0.0; total];
    for u in 0..n {
        let mut s = 0.0;
        for &(t, p) in reversed.row(u) {
            if t >= n {
                let (a, b) = z_pairs[t - n];
                let back = if a == u {
                    z_to_a[t - n]
                } else if b == u {
                    1.0 - z_to_a[t - n]
                } else {
                    0.0
                };
                s += p * back;
            }
        }
        beta[u] = s;
    }

    let mut pi_hat = vec![0.0; total];
    for u in 0..n {
        pi_hat[u] = base_pi.get(u) / (1.0 - beta[u]);
    }
    for (k, &(a, b)) in z_pairs.iter().enumerate() {
        let pa = reversed
            .row(a)
            .iter()
            .find_map(|&(t, p)| (t == n + k).then_some(p))
            .unwrap_or(0.0);
        let pb = reversed
            .row(b)
            .iter()
            .find_map(|&(t, p)| (t == n + k).then_some(p))
            .unwrap_or(0.0);
        pi_hat[n + k] = pi_hat[a] * pa + pi_hat[b] * pb;
        if pi_hat[n + k] <= 0.0 {
            return Err(Error::Config(format!(
                "z state for ({}, {}) got zero measure",
                base.state(a),
                base.state(b)
            )));
        }
    }
    let pi_hat = Measure::new(pi_hat)?;

    // forward kernel as the π̂-dual of the reversed kernel
    let forward = time_reversal(&reversed, &pi_hat)?;

    Ok(AuxChain {
        base,
        base_pi,
        level,
        z_pairs,
        forward,
        reversed,
        pi_hat,
        beta,
        l_values,
    })
}

/// Max absolute deviations of the construction properties, each an exact
/// identity on killed inputs. `max_property_deviation` aggregates the
/// equality-type entries; the inequality-type entries are reported as
/// excesses (0 when satisfied).
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub a_voltage: f64,
    pub b_z_voltage: f64,
    pub b_z_rows: f64,
    pub d1_induced: f64,
    pub d2_two_step: f64,
    pub beta_symmetry: f64,
    pub f_stationarity: f64,
    pub g_untouched_rows: f64,
    pub h_flux: f64,
    pub duality: f64,
    pub sub1_range_margin: f64,
    pub l_bound_excess: f64,
    pub e_equality: f64,
    pub e_inequality_deficit: f64,
    pub prop32_value: f64,
}

impl PropertyReport {
    pub fn max_property_deviation(&self) -> f64 {
        [
            self.a_voltage,
            self.b_z_voltage,
            self.b_z_rows,
            self.d1_induced,
            self.d2_two_step,
            self.beta_symmetry,
            self.f_stationarity,
            self.g_untouched_rows,
            self.h_flux,
            self.duality,
            self.e_equality,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn verify_properties(aux: &AuxChain) -> Result<PropertyReport> {
    let base = &aux.base;
    let pi = &aux.base_pi;
    let n = base.len();
    let total = aux.forward.len();
    let nz = aux.z_pairs.len();
    let delta = aux.level.delta;

    // (a) v̂*(u) = v*(u) on V; (b) v̂*(z) = δ
    let vhat = hitting_voltage(&aux.reversed, &[aux.reversed.origin()], 0.0)?;
    let mut a_voltage: f64 = 0.0;
    for u in 0..n {
        a_voltage = a_voltage.max((vhat[u] - aux.level.vstar[u]).abs());
    }
    let mut b_z_voltage: f64 = 0.0;
    for k in 0..nz {
        b_z_voltage = b_z_voltage.max((vhat[n + k] - delta).abs());
    }

    // (b) z rows: both kernels leave z only to its endpoints, total mass 1;
    // no other state enters z
    let mut b_z_rows: f64 = 0.0;
    for k in 0..nz {
        let (a, b) = aux.z_pairs[k];
        for chainref in [&aux.forward, &aux.reversed] {
            let mut mass = 0.0;
            for &(t, p) in chainref.row(n + k) {
                if t == a || t == b {
                    mass += p;
                } else {
                    b_z_rows = b_z_rows.max(p.abs());
                }
            }
            b_z_rows = b_z_rows.max((mass - 1.0).abs());
            b_z_rows = b_z_rows.max(chainref.kill(n + k).abs());
        }
        for x in 0..total {
            if x != a && x != b {
                b_z_rows = b_z_rows.max(aux.forward.prob(x, n + k));
                b_z_rows = b_z_rows.max(aux.reversed.prob(x, n + k));
            }
        }
    }

    // sub1 strict range and the L(a) bound
    let mut sub1_range_margin = f64::INFINITY;
    for k in 0..nz {
        let (a, _b) = aux.z_pairs[k];
        let p = aux.reversed.prob(n + k, a);
        sub1_range_margin = sub1_range_margin.min(p.min(1.0 - p));
    }
    if nz == 0 {
        sub1_range_margin = 1.0;
    }
    let mut l_bound_excess: f64 = 0.0;
    for a in aux.level.sets.w_hat.iter().copied() {
        if let Some(l) = aux.l_values[a] {
            let bound = aux.level.vstar[a] / (aux.level.vstar[a] - delta);
            l_bound_excess = l_bound_excess.max(l - bound);
        }
    }

    // β symmetry: forward and reversed return weights agree
    let mut beta_symmetry: f64 = 0.0;
    let mut beta_fwd = vec![0.0; n];
    for u in 0..n {
        let mut s = 0.0;
        for &(t, p) in aux.forward.row(u) {
            if t >= n {
                s += p * aux.forward.prob(t, u);
            }
        }
        beta_fwd[u] = s;
        beta_symmetry = beta_symmetry.max((s - aux.beta[u]).abs());
    }

    // (d1)/(d2): the non-lazy V-skeleton of the forward chain is P,
    // deficiency included
    let mut d1_induced: f64 = 0.0;
    let mut d2_two_step: f64 = 0.0;
    for x in 0..n {
        let denom = 1.0 - beta_fwd[x];
        let mut skeleton = vec![0.0; n];
        let mut kill_mass = aux.forward.kill(x);
        for &(t, p) in aux.forward.row(x) {
            if t < n {
                skeleton[t] += p;
            } else {
                let (a, b) = aux.z_pairs[t - n];
                let other = if a == x { b } else { a };
                let step = aux.forward.prob(t, other);
                skeleton[other] += p * step;
                kill_mass += p * aux.forward.kill(t); // zero by construction
            }
        }
        for y in 0..n {
            let induced = skeleton[y] / denom;
            d1_induced = d1_induced.max((induced - base.prob(x, y)).abs());
        }
        d1_induced = d1_induced.max((kill_mass / denom - base.kill(x)).abs());
    }
    for (k, &(a, b)) in aux.z_pairs.iter().enumerate() {
        let two_step = aux.forward.prob(a, n + k) * aux.forward.prob(n + k, b);
        let induced = two_step / (1.0 - beta_fwd[a]);
        d2_two_step = d2_two_step.max((induced - base.prob(a, b)).abs());
    }

    // (f) stationarity in residual form: π̂P̂ − π̂ matches πP − π on V and
    // vanishes on Z (same for the reversed pair)
    let mut f_stationarity: f64 = 0.0;
    for (hat, orig) in [(&aux.forward, base), (&aux.reversed, &time_reversal(base, pi)?)] {
        let mut inflow_hat = vec![0.0; total];
        for x in 0..total {
            for &(y, p) in hat.row(x) {
                inflow_hat[y] += aux.pi_hat.get(x) * p;
            }
        }
        let mut inflow = vec![0.0; n];
        for x in 0..n {
            for &(y, p) in orig.row(x) {
                inflow[y] += pi.get(x) * p;
            }
        }
        for u in 0..n {
            let res_hat = inflow_hat[u] - aux.pi_hat.get(u);
            let res = inflow[u] - pi.get(u);
            f_stationarity = f_stationarity.max((res_hat - res).abs());
        }
        for k in 0..nz {
            f_stationarity =
                f_stationarity.max((inflow_hat[n + k] - aux.pi_hat.get(n + k)).abs());
        }
    }

    // (g) untouched rows coincide with P
    let mut in_modified = vec![false; n];
    for &a in &aux.level.sets.w_hat {
        in_modified[a] = true;
    }
    for &b in &aux.level.sets.u_hat {
        in_modified[b] = true;
    }
    let mut g_untouched_rows: f64 = 0.0;
    for x in 0..n {
        if in_modified[x] {
            continue;
        }
        for y in 0..n {
            g_untouched_rows =
                g_untouched_rows.max((aux.forward.prob(x, y) - base.prob(x, y)).abs());
        }
        for k in 0..nz {
            g_untouched_rows = g_untouched_rows.max(aux.forward.prob(x, n + k));
        }
        g_untouched_rows = g_untouched_rows.max((aux.forward.kill(x) - base.kill(x)).abs());
    }

    // (h) flux identities
    let mut h_flux: f64 = 0.0;
    for (k, &(a, b)) in aux.z_pairs.iter().enumerate() {
        let lhs = aux.pi_hat.get(a) * aux.forward.prob(a, n + k) * aux.forward.prob(n + k, b);
        let rhs = pi.get(a) * base.prob(a, b);
        h_flux = h_flux.max((lhs - rhs).abs());
    }
    let in_j = |x: usize, y: usize| {
        aux.z_pairs.iter().any(|&(a, b)| (a, b) == (x, y) || (a, b) == (y, x))
    };
    for x in 0..n {
        for &(y, p) in base.row(x) {
            if in_j(x, y) {
                continue;
            }
            let lhs = aux.pi_hat.get(x) * aux.forward.prob(x, y);
            let rhs = pi.get(x) * p;
            h_flux = h_flux.max((lhs - rhs).abs());
        }
    }

    // duality π̂(x)P̂(x,y) = π̂(y)P̂*(y,x) over the whole extended space
    let mut duality: f64 = 0.0;
    for x in 0..total {
        for &(y, p) in aux.forward.row(x) {
            let lhs = aux.pi_hat.get(x) * p;
            let rhs = aux.pi_hat.get(y) * aux.reversed.prob(y, x);
            duality = duality.max((lhs - rhs).abs());
        }
    }

    // (e): expected crossings agree off J and dominate through the z-edge
    let green_base = potential::green_table(base, pi.get(base.origin()))?;
    let green_aux = potential::green_table(&aux.forward, aux.pi_hat.get(aux.forward.origin()))?;
    let mut e_equality: f64 = 0.0;
    let mut e_inequality_deficit: f64 = 0.0;
    for (x, y) in base.support_edges() {
        if in_j(x, y) {
            continue;
        }
        let en = green_base.g[x] * base.prob(x, y) + green_base.g[y] * base.prob(y, x);
        let en_hat =
            green_aux.g[x] * aux.forward.prob(x, y) + green_aux.g[y] * aux.forward.prob(y, x);
        e_equality = e_equality.max((en - en_hat).abs());
    }
    for (k, &(a, b)) in aux.z_pairs.iter().enumerate() {
        let z = n + k;
        let en = green_base.g[a] * base.prob(a, b) + green_base.g[b] * base.prob(b, a);
        let en_hat_zb =
            green_aux.g[z] * aux.forward.prob(z, b) + green_aux.g[b] * aux.forward.prob(b, z);
        e_inequality_deficit = e_inequality_deficit.max(en - en_hat_zb);
    }
    e_inequality_deficit = e_inequality_deficit.max(0.0);

    // Prop 3.2 pipeline value: Cap(A_δ*; E_o[N]) on the base chain
    let ec = potential::expected_crossings(base, pi.get(base.origin()))?;
    let mut in_a = vec![false; n];
    for &x in &aux.level.sets.a {
        in_a[x] = true;
    }
    let prop32_value = potential::network_capacity(&ec.network, &in_a)?;

    Ok(PropertyReport {
        a_voltage,
        b_z_voltage,
        b_z_rows,
        d1_induced,
        d2_two_step,
        beta_symmetry,
        f_stationarity,
        g_untouched_rows,
        h_flux,
        duality,
        sub1_range_margin,
        l_bound_excess: l_bound_excess.max(0.0),
        e_equality,
        e_inequality_deficit,
        prop32_value,
    })
}

/// The partition of V̂ by v̂* against δ, with Ẑ = Z ∪ (W ∖ Ŵ), and the
/// no-crossing property: no P̂-transition from {v̂* > δ} into {v̂* < δ}.
#[derive(Debug, Clone)]
pub struct RemarkSets {
    pub z_hat: Vec<usize>,
    pub above: Vec<usize>,
    pub below: Vec<usize>,
    /// Max P̂(x,y) over x above, y below; 0 means the property holds.
    pub crossing_mass: f64,
    /// Max |v̂* − δ| over Ẑ and min distance to δ off Ẑ.
    pub partition_deviation: f64,
}

pub fn remark_sets(aux: &AuxChain) -> Result<RemarkSets> {
    let n = aux.base.len();
    let nz = aux.z_pairs.len();
    let total = n + nz;
    let delta = aux.level.delta;
    let vhat = hitting_voltage(&aux.reversed, &[aux.reversed.origin()], 0.0)?;

    let mut expected_zhat = vec![false; total];
    for k in 0..nz {
        expected_zhat[n + k] = true;
    }
    let w_hat: std::collections::HashSet<usize> =
        aux.level.sets.w_hat.iter().copied().collect();
    for &w in &aux.level.sets.w {
        if !w_hat.contains(&w) {
            expected_zhat[w] = true;
        }
    }

    let mut z_hat = Vec::new();
    let mut above = Vec::new();
    let mut below = Vec::new();
    let mut partition_deviation: f64 = 0.0;
    for x in 0..total {
        if expected_zhat[x] {
            partition_deviation = partition_deviation.max((vhat[x] - delta).abs());
            z_hat.push(x);
        } else if vhat[x] > delta {
            above.push(x);
        } else {
            below.push(x);
        }
    }
    // the three displayed identities: above = A* minus (W∖Ŵ), below = V*
    for &x in &above {
        if x < n && !aux.level.sets.a.contains(&x) {
            partition_deviation = partition_deviation.max((vhat[x] - delta).abs());
        }
    }
    for &x in &below {
        if x < n && !aux.level.sets.v.contains(&x) {
            partition_deviation = partition_deviation.max((delta - vhat[x]).abs());
        }
    }

    let mut crossing_mass: f64 = 0.0;
    let below_mask: Vec<bool> = {
        let mut m = vec![false; total];
        for &x in &below {
            m[x] = true;
        }
        m
    };
    for &x in &above {
        for &(y, p) in aux.forward.row(x) {
            if below_mask[y] {
                crossing_mass = crossing_mass.max(p);
            }
        }
    }
    Ok(RemarkSets { z_hat, above, below, crossing_mass, partition_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bd::BdWeights;
    use crate::instances::{killed_bd_exact_tail, random_killed_chain};
    use rand::SeedableRng;

    fn two_pow(r: u64) -> (FiniteChain, Measure) {
        killed_bd_exact_tail(&BdWeights::geometric(2.0), r).unwrap()
    }

    #[test]
    fn level_data_two_pow_delta_03() {
        let (chain, pi) = two_pow(9);
        let ld = level_data(&chain, &pi, 0.3).unwrap();
        let lvl = |i: i64| chain.require_index(StateId::Int(i)).unwrap();
        assert_eq!(ld.sets.a, vec![lvl(0), lvl(1)]);
        assert_eq!(ld.sets.w_hat, vec![lvl(1)]);
        assert_eq!(ld.sets.u_hat, vec![lvl(2)]);
        assert_eq!(ld.j_pairs(), &[(lvl(1), lvl(2))]);
        assert!(ld.d.is_empty());
    }

    #[test]
    fn level_data_delta_half_hits_voltage() {
        // exact-tail chain has v*(1) = 1/2 exactly, so δ = 0.5 must refuse
        let (chain, pi) = two_pow(9);
        assert!(matches!(
            level_data(&chain, &pi, 0.5),
            Err(Error::DeltaCollision { .. })
        ));
        // while a δ strictly between voltage values gives Ŵ by strictness
        let ld = level_data(&chain, &pi, 0.45).unwrap();
        let lvl = |i: i64| chain.require_index(StateId::Int(i)).unwrap();
        assert_eq!(ld.sets.w, vec![lvl(1)]);
        assert_eq!(ld.sets.w_hat, vec![lvl(1)]);
    }

    #[test]
    fn sub1_example_values() {
        // J = {(1,2)}, v*(1) = 0.5, v*(2) = 0.25, δ = 0.3:
        // P̂*(z,1) = 0.05/0.25 = 0.2
        let (chain, pi) = two_pow(9);
        let aux = build_aux(&chain, &pi, 0.3).unwrap();
        assert_eq!(aux.z_pairs.len(), 1);
        let z = aux.n_base();
        let one = chain.require_index(StateId::Int(1)).unwrap();
        let two = chain.require_index(StateId::Int(2)).unwrap();
        assert!((aux.reversed.prob(z, one) - 0.2).abs() < 1e-12);
        assert!((aux.reversed.prob(z, two) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn induced_transition_matches_d_example() {
        // P̂_1[X̂_T = 2] = P(1,2) = 2/3
        let (chain, pi) = two_pow(9);
        let aux = build_aux(&chain, &pi, 0.3).unwrap();
        let report = verify_properties(&aux).unwrap();
        assert!(report.d2_two_step < 1e-12);
        let one = chain.require_index(StateId::Int(1)).unwrap();
        let two = chain.require_index(StateId::Int(2)).unwrap();
        let z = aux.n_base();
        let beta1: f64 = aux.forward.prob(one, z) * aux.forward.prob(z, one);
        let induced = aux.forward.prob(one, z) * aux.forward.prob(z, two) / (1.0 - beta1);
        assert!((induced - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_pow_properties_exact() {
        let (chain, pi) = two_pow(9);
        for delta in [0.3, 0.45] {
            let aux = build_aux(&chain, &pi, delta).unwrap();
            let report = verify_properties(&aux).unwrap();
            assert!(
                report.max_property_deviation() < 1e-10,
                "delta {delta}: {report:?}"
            );
            assert!(report.sub1_range_margin > 0.0);
            assert!(report.l_bound_excess <= 1e-12);
            assert!(report.e_inequality_deficit <= 1e-10);
            assert!(report.prop32_value <= 2.0 + 1e-8);
        }
    }

    #[test]
    fn empty_j_gives_back_original() {
        // δ above every non-origin voltage: A* = {0}, no A*→V* edge from a
        // strict state... on the 2^i chain δ=0.9 gives Ŵ = {0}? v*(0)=1 > 0.9
        // and P(0,1) > 0 with v*(1) = 0.5 < 0.9, so J = {(0,1)}. To get an
        // empty J use a chain whose origin is the only high state and the
        // origin row is what it is -- instead take δ just under the minimal
        // positive voltage so V* is empty.
        let (chain, pi) = two_pow(5);
        let min_v = 2f64.powi(-5);
        let aux = build_aux(&chain, &pi, min_v * 0.9).unwrap();
        assert!(aux.z_pairs.is_empty());
        let report = verify_properties(&aux).unwrap();
        assert!(report.max_property_deviation() < 1e-12);
        for x in 0..chain.len() {
            for y in 0..chain.len() {
                assert!((aux.forward.prob(x, y) - chain.prob(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn remark_sets_examples() {
        let (chain, pi) = two_pow(9);
        let aux = build_aux(&chain, &pi, 0.3).unwrap();
        let rs = remark_sets(&aux).unwrap();
        assert_eq!(rs.z_hat, vec![aux.n_base()]);
        assert!(rs.crossing_mass == 0.0);
        assert!(rs.partition_deviation < 1e-12);

        // δ = 0.45 keeps Ŵ = {1}; to exercise Ẑ ∋ a W∖Ŵ member use a chain
        // где the boundary state voltage sits exactly at... covered by the
        // random harness; here just check consistency
        let aux2 = build_aux(&chain, &pi, 0.45).unwrap();
        let rs2 = remark_sets(&aux2).unwrap();
        assert!(rs2.crossing_mass == 0.0);
    }

    #[test]
    fn random_killed_chains_properties_hold() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut built = 0;
        while built < 50 {
            let n = rand::Rng::gen_range(&mut rng, 8..=40);
            let (chain, pi) = random_killed_chain(&mut rng, n);
            let delta = rand::Rng::gen_range(&mut rng, 0.08..0.92);
            let aux = match build_aux(&chain, &pi, delta) {
                Ok(aux) => aux,
                Err(Error::DeltaCollision { .. }) => continue,
                Err(e) => panic!("build failed: {e}"),
            };
            let report = verify_properties(&aux).unwrap();
            assert!(
                report.max_property_deviation() < 1e-10,
                "n={n} delta={delta}: {report:?}"
            );
            assert!(report.sub1_range_margin > 0.0);
            assert!(report.l_bound_excess <= 1e-10);
            assert!(report.e_inequality_deficit <= 1e-10);
            assert!(report.prop32_value <= 2.0 + 1e-8);
            let rs = remark_sets(&aux).unwrap();
            assert!(rs.crossing_mass == 0.0, "no-crossing violated");
            assert!(rs.partition_deviation < 1e-9);
            built += 1;
        }
    }

    #[test]
    fn holding_probabilities_are_stripped() {
        // add holding to the 2^i chain and check the aux build still works
        let (chain, pi) = two_pow(7);
        let n = chain.len();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        for x in 0..n {
            let mut row: Vec<(usize, f64)> = chain
                .row(x)
                .iter()
                .map(|&(y, p)| (y, 0.6 * p))
                .collect();
            row.push((x, 0.4));
            rows.push(row);
        }
        let kill: Vec<f64> = (0..n).map(|x| 0.6 * chain.kill(x)).collect();
        let lazy = FiniteChain::from_rows(
            chain.states().to_vec(),
            rows,
            kill,
            chain.state(chain.origin()),
            BoundaryMode::Killed,
        )
        .unwrap();
        // π is ALSO superstationary for the lazy chain (πP_lazy ≤ π), and
        // preparation rescales it to the jump-chain measure
        let aux = build_aux(&lazy, &pi, 0.3).unwrap();
        let report = verify_properties(&aux).unwrap();
        assert!(report.max_property_deviation() < 1e-10);
    }
}
