//! TOML configuration with per-command sections; flags win over file values.

use std::fmt;
use std::path::Path;

/// Command-level error with the documented exit-code mapping.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    BudgetExhausted(String),
    DegenerateDelta(String),
    InvariantViolation(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::BudgetExhausted(_) => 3,
            CliError::DegenerateDelta(_) => 4,
            CliError::InvariantViolation(_) => 5,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::BudgetExhausted(m) => write!(f, "budget exhausted: {m}"),
            CliError::DegenerateDelta(m) => write!(f, "degenerate delta: {m}"),
            CliError::InvariantViolation(m) => write!(f, "invariant violation: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<chaintrace::Error> for CliError {
    fn from(e: chaintrace::Error) -> Self {
        use chaintrace::Error as E;
        match e {
            E::DeltaCollision { .. } | E::BracketTooWide { .. } => {
                CliError::DegenerateDelta(e.to_string())
            }
            E::BudgetExhausted { .. } => CliError::BudgetExhausted(e.to_string()),
            E::Config(_) | E::Parse { .. } | E::OriginExcluded(_) | E::EmptyInterior => {
                CliError::Config(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("io: {e}"))
    }
}

pub type CliResult = Result<(), CliError>;

/// Parsed configuration file (empty table when absent).
pub struct Config {
    table: toml::Table,
}

pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
    let table = match path {
        None => toml::Table::new(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| CliError::Config(format!("parsing {}: {e}", p.display())))?
        }
    };
    Ok(Config { table })
}

impl Config {
    fn section(&self, name: &str) -> Option<&toml::Table> {
        self.table.get(name).and_then(|v| v.as_table())
    }

    pub fn u64_or(&self, section: &str, key: &str, flag: Option<u64>, default: u64) -> u64 {
        flag.or_else(|| {
            self.section(section)
                .and_then(|s| s.get(key))
                .and_then(|v| v.as_integer())
                .map(|v| v as u64)
        })
        .unwrap_or(default)
    }

    pub fn f64_opt(&self, section: &str, key: &str, flag: Option<f64>) -> Option<f64> {
        flag.or_else(|| {
            self.section(section)
                .and_then(|s| s.get(key))
                .and_then(|v| v.as_float())
        })
    }

    pub fn string_or(
        &self,
        section: &str,
        key: &str,
        flag: Option<String>,
        default: &str,
    ) -> String {
        flag.or_else(|| {
            self.section(section)
                .and_then(|s| s.get(key))
                .and_then(|v| v.as_str())
                .map(str::to_owned)
        })
        .unwrap_or_else(|| default.to_owned())
    }

    pub fn string_opt(&self, section: &str, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| {
            self.section(section)
                .and_then(|s| s.get(key))
                .and_then(|v| v.as_str())
                .map(str::to_owned)
        })
    }
}

/// Output directory resolution: flag, then TRACE_LAB_OUT, then default.
pub fn out_dir(flag: Option<std::path::PathBuf>) -> std::path::PathBuf {
    flag.or_else(|| std::env::var_os("TRACE_LAB_OUT").map(Into::into))
        .unwrap_or_else(|| "out".into())
}
