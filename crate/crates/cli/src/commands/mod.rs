pub mod potential;
pub mod simulate_bd;
pub mod simulate_z2;
pub mod subdivide;
pub mod trace;

use crate::config::CliError;
use chaintrace::bd::BdWeights;
use chaintrace::instances::{self, ChainFamily};

/// Weight tags: `kozma:S`, `jlp`, `2pow`, `geometric:R`, `custom:PATH`.
pub fn parse_weights(tag: &str) -> Result<BdWeights, CliError> {
    if let Some(s) = tag.strip_prefix("kozma:") {
        let s: u32 = s
            .parse()
            .map_err(|_| CliError::Config(format!("bad kozma tag {tag}")))?;
        return Ok(BdWeights::kozma(s));
    }
    match tag {
        "jlp" => return Ok(BdWeights::jlp()),
        "2pow" => return Ok(BdWeights::geometric(2.0)),
        "3halves" => return Ok(BdWeights::geometric(1.5)),
        _ => {}
    }
    if let Some(r) = tag.strip_prefix("geometric:") {
        let r: f64 = r
            .parse()
            .map_err(|_| CliError::Config(format!("bad geometric ratio in {tag}")))?;
        return Ok(BdWeights::geometric(r));
    }
    if let Some(path) = tag.strip_prefix("custom:") {
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::Config(format!("weights file {path}: {e}")))?;
        return Ok(BdWeights::read_custom(std::io::BufReader::new(file))?);
    }
    Err(CliError::Config(format!("unknown weights tag {tag}")))
}

/// Chain tags: `bd:<weights>`, `biased:<p>`, `helix:<weights>`.
pub fn parse_family(tag: &str) -> Result<ChainFamily, CliError> {
    if let Some(w) = tag.strip_prefix("bd:") {
        let weights = parse_weights(w)?;
        let pi_w = weights.clone();
        return Ok(ChainFamily::new(
            format!("bd:{w}"),
            Box::new(instances::bd_kernel(&weights)),
            Box::new(move |s| pi_w.pi(s.as_int().unwrap() as u64)),
        ));
    }
    if let Some(p) = tag.strip_prefix("biased:") {
        let p: f64 = p
            .parse()
            .map_err(|_| CliError::Config(format!("bad bias in {tag}")))?;
        if !(0.0 < p && p < 1.0) {
            return Err(CliError::Config(format!("bias {p} outside (0,1)")));
        }
        return Ok(instances::biased_z_family(p));
    }
    if let Some(w) = tag.strip_prefix("helix:") {
        return Ok(instances::helix_family(&parse_weights(w)?));
    }
    Err(CliError::Config(format!("unknown chain tag {tag}")))
}

/// `a..b` dyadic ladders (powers of two from a to b) or comma lists.
pub fn parse_radii(spec: &str) -> Result<Vec<u64>, CliError> {
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a
            .parse()
            .map_err(|_| CliError::Config(format!("bad radius in {spec}")))?;
        let b: u64 = b
            .parse()
            .map_err(|_| CliError::Config(format!("bad radius in {spec}")))?;
        if a == 0 || b < a {
            return Err(CliError::Config(format!("bad radius range {spec}")));
        }
        let mut out = Vec::new();
        let mut r = a;
        while r <= b {
            out.push(r);
            r = r.saturating_mul(2);
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        out.push(
            part.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad radius {part}")))?,
        );
    }
    if out.is_empty() || out.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("radii must increase: {spec}")));
    }
    Ok(out)
}

/// `start:end:step` sweeps.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("expected start:end:step, got {spec}")));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Config(format!("bad sweep bound in {spec}")))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Config(format!("bad sweep bound in {spec}")))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| CliError::Config(format!("bad sweep step in {spec}")))?;
    if step <= 0.0 || b < a {
        return Err(CliError::Config(format!("bad sweep {spec}")));
    }
    let mut out = Vec::new();
    let mut x = a;
    while x <= b + 1e-12 {
        out.push((x * 1e12).round() / 1e12);
        x += step;
    }
    Ok(out)
}

pub fn write_json(path: &std::path::Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Other(format!("serializing json: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
