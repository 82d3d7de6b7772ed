use clap::Parser;

use crate::config::{out_dir, CliError, CliResult, Config};
use chaintrace::chain::BoundaryMode;
use chaintrace::subdivision::{build_aux, remark_sets, verify_properties};

#[derive(Parser)]
pub struct Args {
    /// Chain family: bd:<weights> | biased:<p> | helix:<weights>.
    #[arg(long)]
    chain: Option<String>,
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Property tolerance; deviations above it exit with code 5.
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the subdivided kernels as `x y prob` triple files.
    #[arg(long)]
    export: bool,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

pub fn run(args: Args, config: &Config) -> CliResult {
    let chain_tag = config.string_or("subdivide", "chain", args.chain, "bd:2pow");
    let family = super::parse_family(&chain_tag)?;
    let radius = config.u64_or("subdivide", "radius", args.radius, 9);
    let delta = config
        .f64_opt("subdivide", "delta", args.delta)
        .ok_or_else(|| CliError::Config("missing --delta".into()))?;
    let tol = config.f64_opt("subdivide", "tol", args.tol).unwrap_or(1e-10);
    let dir = out_dir(args.out);
    std::fs::create_dir_all(&dir)?;

    let chain = family.truncate(radius, BoundaryMode::Killed)?;
    let pi = family.measure_on(&chain)?;
    let aux = build_aux(&chain, &pi, delta)?;
    let report = verify_properties(&aux)?;
    let remark = remark_sets(&aux)?;

    let report_json = serde_json::json!({
        "chain": chain_tag,
        "radius": radius,
        "delta": delta,
        "subdivided_pairs": aux.z_pairs.len(),
        "report": report,
        "max_property_deviation": report.max_property_deviation(),
        "remark": {
            "z_hat_size": remark.z_hat.len(),
            "crossing_mass": remark.crossing_mass,
            "partition_deviation": remark.partition_deviation,
        },
        "aux": aux.export_json(),
    });
    super::write_json(&dir.join("subdivision_report.json"), &report_json)?;

    if args.export {
        let mut fwd = Vec::new();
        aux.forward.write_kernel(&mut fwd)?;
        std::fs::write(dir.join("p_hat.triples"), fwd)?;
        let mut rev = Vec::new();
        aux.reversed.write_kernel(&mut rev)?;
        std::fs::write(dir.join("p_hat_star.triples"), rev)?;
    }

    let worst = report
        .max_property_deviation()
        .max(remark.crossing_mass)
        .max(remark.partition_deviation);
    if worst > tol {
        return Err(CliError::InvariantViolation(format!(
            "max property deviation {worst:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    Ok(())
}
