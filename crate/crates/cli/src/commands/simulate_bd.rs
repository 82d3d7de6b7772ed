use clap::Parser;
use rayon::prelude::*;

use crate::config::{out_dir, CliError, CliResult, Config};
use chaintrace::bd::{self, StopRule};

#[derive(Parser)]
pub struct Args {
    /// Weight family: kozma:S | jlp | 2pow | geometric:R | custom:PATH.
    #[arg(long)]
    weights: Option<String>,
    /// Shorthand for --weights kozma:S.
    #[arg(long)]
    s: Option<u32>,
    /// Target level per run.
    #[arg(long)]
    level: Option<u64>,
    /// Number of independent runs (seeds seed, seed+1, ...).
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-run step budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Comma-separated k values for local-regeneration tables.
    #[arg(long)]
    cut_times: Option<String>,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

pub fn run(args: Args, config: &Config) -> CliResult {
    let weights_tag = match (args.weights, args.s) {
        (Some(w), _) => w,
        (None, Some(s)) => format!("kozma:{s}"),
        (None, None) => config.string_or("simulate-bd", "weights", None, "kozma:0"),
    };
    let weights = super::parse_weights(&weights_tag)?;
    let level = config.u64_or("simulate-bd", "level", args.level, 1024);
    let runs = config.u64_or("simulate-bd", "runs", args.runs, 1);
    let seed = config.u64_or("simulate-bd", "seed", args.seed, 1);
    let budget = config.u64_or("simulate-bd", "budget", args.budget, bd::DEFAULT_STEP_BUDGET);
    if runs == 0 {
        return Err(CliError::Config("need at least one run".into()));
    }
    let dir = out_dir(args.out);
    std::fs::create_dir_all(&dir)?;

    let ledgers: Vec<bd::CrossingLedger> = (0..runs)
        .into_par_iter()
        .map(|r| bd::simulate(&weights, StopRule::Level(level), budget, bd::derive_seed(seed, r)))
        .collect();

    let mut exhausted = 0u64;
    for (r, ledger) in ledgers.iter().enumerate() {
        let mut csv = Vec::new();
        ledger.write_csv(&mut csv)?;
        std::fs::write(dir.join(format!("run_{r}.csv")), csv)?;
        super::write_json(&dir.join(format!("run_{r}.json")), &ledger.header_json())?;
        if ledger.exhausted {
            exhausted += 1;
        }
    }

    // aggregate fraction statistics over the completed runs
    let completed: Vec<&bd::CrossingLedger> =
        ledgers.iter().filter(|l| !l.exhausted).collect();
    let window = level.min(1 << 10);
    let frac_cross3 = if completed.is_empty() {
        0.0
    } else {
        completed
            .iter()
            .filter(|l| (0..window).all(|k| l.crossings(k) >= 3))
            .count() as f64
            / completed.len() as f64
    };
    let min_ratio: Vec<f64> = completed
        .iter()
        .map(|l| {
            (1..window)
                .map(|k| l.crossings(k) as f64 / k as f64)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let mut summary = serde_json::json!({
        "weights": weights_tag,
        "level": level,
        "runs": runs,
        "seed": seed,
        "budget": budget,
        "completed": completed.len(),
        "exhausted": exhausted,
        "all_edges_crossed_3x_fraction": frac_cross3,
        "min_crossing_ratio": min_ratio,
    });

    if let Some(list) = config.string_opt("simulate-bd", "cut_times", args.cut_times) {
        let mut tables = serde_json::Map::new();
        for part in list.split(',') {
            let k: u64 = part
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad cut-times entry {part}")))?;
            let rows: Vec<serde_json::Value> = (0..runs)
                .into_par_iter()
                .map(|r| {
                    let ws = bd::windowed_regenerations(&weights, k, bd::derive_seed(seed, r));
                    serde_json::json!({
                        "run": r,
                        "x_size": ws.x_size,
                        "xprime_size": ws.xprime_size,
                    })
                })
                .collect();
            let mut csv = String::from("run,x_size,xprime_size\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    row["run"], row["x_size"], row["xprime_size"]
                ));
            }
            std::fs::write(dir.join(format!("cut_times_k{k}.csv")), csv)?;
            tables.insert(format!("k{k}"), serde_json::Value::Array(rows));
        }
        summary["cut_times"] = serde_json::Value::Object(tables);
    }

    super::write_json(&dir.join("summary.json"), &summary)?;

    if exhausted > 0 {
        return Err(CliError::BudgetExhausted(format!(
            "{exhausted} of {runs} runs stopped early; partial ledgers kept in {}",
            dir.display()
        )));
    }
    Ok(())
}
