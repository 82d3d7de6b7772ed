use std::io::BufRead;

use clap::Parser;

use crate::config::{out_dir, CliError, CliResult, Config};
use chaintrace::bd::CrossingLedger;
use chaintrace::trace::{
    expected_network_profile, harmonic_crossing_sum, record_bd_trace, trace_resistance_profile,
};

#[derive(Parser)]
pub struct Args {
    /// Ledger CSV produced by simulate-bd (`i,crossings,visits`).
    #[arg(long)]
    ledger: Option<std::path::PathBuf>,
    /// Chain family for --expected profiles.
    #[arg(long)]
    chain: Option<String>,
    /// Radii ladder for the resistance profile.
    #[arg(long)]
    radii: Option<String>,
    /// Compute the exact expected-crossings profile instead of a trace one.
    #[arg(long)]
    expected: bool,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn read_ledger_csv(path: &std::path::Path) -> Result<CrossingLedger, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Config(format!("ledger {}: {e}", path.display())))?;
    let mut crossings: Vec<u64> = Vec::new();
    let mut visits: Vec<u64> = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || lineno == 0 {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Config(format!(
                "{}: line {} is not `i,crossings,visits`",
                path.display(),
                lineno + 1
            )));
        }
        let parse = |s: &str| -> Result<u64, CliError> {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad number {s} in ledger")))
        };
        crossings.push(parse(fields[1])?);
        visits.push(parse(fields[2])?);
    }
    if visits.is_empty() {
        return Err(CliError::Config("empty ledger".into()));
    }
    // reconstruct the up/down split from the crossing parities: on a line
    // every edge below the final level has one extra up-crossing
    let final_level = (0..crossings.len())
        .rev()
        .find(|&i| crossings[i] > 0)
        .map(|i| i as u64 + 1)
        .unwrap_or(0);
    let mut up = vec![0u64; crossings.len()];
    let mut down = vec![0u64; crossings.len()];
    for i in 0..crossings.len() {
        let extra = u64::from((i as u64) < final_level);
        up[i] = (crossings[i] + extra) / 2;
        down[i] = crossings[i] - up[i];
    }
    let steps = crossings.iter().sum();
    Ok(CrossingLedger {
        weights_tag: "from-csv".into(),
        seeds: vec![0],
        up,
        down,
        visits,
        steps,
        final_level,
        exhausted: false,
    })
}

pub fn run(args: Args, config: &Config) -> CliResult {
    let radii_spec = config.string_or("trace", "radii", args.radii, "8..256");
    let radii = super::parse_radii(&radii_spec)?;
    let dir = out_dir(args.out);
    std::fs::create_dir_all(&dir)?;

    let profile = if args.expected {
        let chain_tag = config.string_or("trace", "chain", args.chain, "bd:2pow");
        let family = super::parse_family(&chain_tag)?;
        expected_network_profile(&family, &radii)?
    } else {
        let path = args
            .ledger
            .or_else(|| {
                config
                    .string_opt("trace", "ledger", None)
                    .map(std::path::PathBuf::from)
            })
            .ok_or_else(|| CliError::Config("need --ledger or --expected".into()))?;
        let ledger = read_ledger_csv(&path)?;
        let trace = record_bd_trace(&ledger)?;
        let max_r = ledger.max_level();
        let usable: Vec<u64> = radii.iter().copied().filter(|&r| r <= max_r).collect();
        if usable.is_empty() {
            return Err(CliError::Config(format!(
                "ledger only reaches level {max_r}, below every requested radius"
            )));
        }
        // the harmonic-sum identity is exact on a line; emit both
        let sums = harmonic_crossing_sum(&ledger, *usable.last().unwrap())?;
        let mut csv = String::from("n,harmonic_sum\n");
        for (i, s) in sums.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, s));
        }
        std::fs::write(dir.join("harmonic_sums.csv"), csv)?;
        trace_resistance_profile(&trace, &usable)?
    };

    let mut csv = Vec::new();
    profile.write_csv(&mut csv)?;
    std::fs::write(dir.join("profile.csv"), csv)?;
    super::write_json(
        &dir.join("profile.json"),
        &serde_json::json!({
            "radii": profile.radii,
            "resistance_N": profile.resistance_n,
            "resistance_unit": profile.resistance_unit,
            "verdict": profile.verdict,
        }),
    )?;
    Ok(())
}
