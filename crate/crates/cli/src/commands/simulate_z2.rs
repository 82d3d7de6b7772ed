use clap::Parser;
use rayon::prelude::*;

use crate::config::{out_dir, CliError, CliResult, Config};
use chaintrace::bd::derive_seed;
use chaintrace::spiral::{self, coverage_report, SpiralConfig, Variant};

#[derive(Parser)]
pub struct Args {
    /// Stop once the sup-norm radius exceeds this.
    #[arg(long, short = 'r')]
    radius: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    /// kozma | bounded-below.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

pub fn run(args: Args, config: &Config) -> CliResult {
    let radius = config.u64_or("simulate-z2", "radius", args.radius, 32) as u32;
    let runs = config.u64_or("simulate-z2", "runs", args.runs, 1);
    let seed = config.u64_or("simulate-z2", "seed", args.seed, 1);
    let budget = config.u64_or("simulate-z2", "budget", args.budget, 1 << 33);
    let variant_tag = config.string_or("simulate-z2", "variant", args.variant, "kozma");
    let variant = match variant_tag.as_str() {
        "kozma" => Variant::Kozma,
        "bounded-below" => Variant::BoundedBelow,
        other => return Err(CliError::Config(format!("unknown variant {other}"))),
    };
    if runs == 0 {
        return Err(CliError::Config("need at least one run".into()));
    }
    let dir = out_dir(args.out);
    std::fs::create_dir_all(&dir)?;

    let covs: Vec<spiral::EdgeCoverage> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = SpiralConfig::new(variant, radius, budget, derive_seed(seed, r));
            spiral::simulate(&cfg)
        })
        .collect();

    let mut exhausted = 0u64;
    for (r, cov) in covs.iter().enumerate() {
        let mut csv = Vec::new();
        cov.write_csv(&mut csv)?;
        std::fs::write(dir.join(format!("coverage_{r}.csv")), csv)?;
        super::write_json(&dir.join(format!("coverage_{r}.json")), &cov.summary_json(radius))?;
        if cov.exhausted {
            exhausted += 1;
        }
    }

    // full-coverage fraction at dyadic boxes up to the simulation radius
    let mut boxes = Vec::new();
    let mut b = 4u32;
    while b <= radius {
        boxes.push(b);
        b *= 2;
    }
    let completed: Vec<&spiral::EdgeCoverage> = covs.iter().filter(|c| !c.exhausted).collect();
    let mut fractions = serde_json::Map::new();
    for &b in &boxes {
        let full = completed
            .iter()
            .filter(|c| coverage_report(c, b).uncovered.is_empty())
            .count();
        let frac = if completed.is_empty() {
            0.0
        } else {
            full as f64 / completed.len() as f64
        };
        fractions.insert(format!("box_{b}"), serde_json::json!(frac));
    }
    let summary = serde_json::json!({
        "variant": variant_tag,
        "radius": radius,
        "runs": runs,
        "seed": seed,
        "completed": completed.len(),
        "exhausted": exhausted,
        "full_coverage_fraction": fractions,
    });
    super::write_json(&dir.join("summary.json"), &summary)?;

    if exhausted > 0 {
        return Err(CliError::BudgetExhausted(format!(
            "{exhausted} of {runs} runs stopped early; partial coverage kept in {}",
            dir.display()
        )));
    }
    Ok(())
}
