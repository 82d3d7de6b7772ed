use clap::Parser;

use crate::config::{out_dir, CliError, CliResult, Config};
use chaintrace::chain::BoundaryMode;
use chaintrace::potential::{
    capacity_profile, capacity_set_with, expected_crossings, green_table, hitting_voltage,
    network_capacity,
};

#[derive(Parser)]
pub struct Args {
    /// Chain family: bd:<weights> | biased:<p> | helix:<weights>.
    #[arg(long)]
    chain: Option<String>,
    /// Level set whose capacity ladder is computed (single level/state id).
    #[arg(long)]
    cap: Option<i64>,
    /// Truncation ladder `a..b` (dyadic) or comma list.
    #[arg(long)]
    radii: Option<String>,
    /// δ sweep `start:end:step` for the level-set checks.
    #[arg(long)]
    delta_sweep: Option<String>,
    /// Check to run over the sweep: capadel | prop32.
    #[arg(long)]
    check: Option<String>,
    /// Exit nonzero if a checked inequality fails.
    #[arg(long)]
    assert_invariants: bool,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

pub fn run(args: Args, config: &Config) -> CliResult {
    let chain_tag = config.string_or("potential", "chain", args.chain, "bd:2pow");
    let family = super::parse_family(&chain_tag)?;
    let radii_spec = config.string_or("potential", "radii", args.radii, "8..1024");
    let radii = super::parse_radii(&radii_spec)?;
    let dir = out_dir(args.out);
    std::fs::create_dir_all(&dir)?;

    let origin = family.origin();
    let mut records = Vec::new();

    // capacity ladder of the requested set (default: the origin)
    let cap_target = match config.f64_opt("potential", "cap", args.cap.map(|v| v as f64)) {
        Some(v) => chaintrace::StateId::Int(v as i64),
        None => origin,
    };
    let est = capacity_profile(&family, &[cap_target], &radii)?;
    let mut csv = String::from("R,capacity\n");
    for (r, v) in est.radii.iter().zip(&est.values) {
        csv.push_str(&format!("{r},{v}\n"));
    }
    std::fs::write(dir.join("capacity.csv"), csv)?;
    records.push(serde_json::json!({
        "quantity": "capacity",
        "sets": [cap_target.to_string()],
        "truncation_sequence": est.radii,
        "values": est.values,
        "residuals": { "monotonicity_violation": est.monotonicity_violation() },
    }));

    // Green table and α at the largest radius
    let rmax = *radii.last().unwrap();
    let chain = family.truncate(rmax, BoundaryMode::Killed)?;
    let table = green_table(&chain, family.pi_of(origin))?;
    records.push(serde_json::json!({
        "quantity": "green",
        "sets": [origin.to_string()],
        "truncation_sequence": [rmax],
        "values": { "g_oo": table.g[chain.origin()], "alpha": table.alpha },
        "residuals": {},
    }));

    let mut violations: Vec<String> = Vec::new();
    if let Some(sweep) = config.string_opt("potential", "delta_sweep", args.delta_sweep) {
        let deltas = super::parse_sweep(&sweep)?;
        let check = config.string_or("potential", "check", args.check, "capadel");
        let mut sweep_rows = Vec::new();
        match check.as_str() {
            "capadel" => {
                let v = hitting_voltage(&chain, &[chain.origin()], 0.0)?;
                let cap_o =
                    capacity_set_with(&chain, |i| family.pi_of(chain.state(i)), &[chain.origin()])?;
                for &delta in &deltas {
                    let a: Vec<usize> =
                        (0..chain.len()).filter(|&x| v[x] >= delta).collect();
                    let cap_a =
                        capacity_set_with(&chain, |i| family.pi_of(chain.state(i)), &a)?;
                    let bound = cap_o / delta;
                    let pass = cap_a <= bound + 1e-10;
                    if !pass {
                        violations.push(format!(
                            "capadel at delta {delta}: {cap_a} > {bound}"
                        ));
                    }
                    sweep_rows.push(serde_json::json!({
                        "delta": delta,
                        "cap_a_delta": cap_a,
                        "bound": bound,
                        "a_size": a.len(),
                        "pass": pass,
                    }));
                }
            }
            "prop32" => {
                let pi = family.measure_on(&chain)?;
                let rev = chaintrace::chain::time_reversal(&chain, &pi)?;
                let vstar = hitting_voltage(&rev, &[chain.origin()], 0.0)?;
                let ec = expected_crossings(&chain, family.pi_of(origin))?;
                for &delta in &deltas {
                    let in_a: Vec<bool> = (0..chain.len()).map(|x| vstar[x] >= delta).collect();
                    let cap = network_capacity(&ec.network, &in_a)?;
                    let pass = cap <= 2.0 + 1e-8;
                    if !pass {
                        violations.push(format!("prop32 at delta {delta}: {cap} > 2"));
                    }
                    sweep_rows.push(serde_json::json!({
                        "delta": delta,
                        "cap_a_star_expected_crossings": cap,
                        "bound": 2.0,
                        "pass": pass,
                    }));
                }
            }
            other => return Err(CliError::Config(format!("unknown check {other}"))),
        }
        let mut csv = String::from("delta,value,bound,pass\n");
        for row in &sweep_rows {
            let value = row
                .get("cap_a_delta")
                .or_else(|| row.get("cap_a_star_expected_crossings"))
                .unwrap();
            csv.push_str(&format!(
                "{},{},{},{}\n",
                row["delta"], value, row["bound"], row["pass"]
            ));
        }
        std::fs::write(dir.join(format!("check_{check}.csv")), csv)?;
        records.push(serde_json::json!({
            "quantity": format!("check:{check}"),
            "sets": [],
            "truncation_sequence": [rmax],
            "values": sweep_rows,
            "residuals": {},
        }));
    }

    super::write_json(&dir.join("potential.json"), &serde_json::json!(records))?;

    if args.assert_invariants && !violations.is_empty() {
        return Err(CliError::InvariantViolation(violations.join("; ")));
    }
    Ok(())
}
