//! Library half of the `marnet` command: bound tables, λ sweeps, gradient
//! checks and file IO. `main.rs` only parses arguments and maps errors to
//! exit codes.

pub mod config;
pub mod gradcheck;
pub mod io;
pub mod report;
pub mod sweep;

use thiserror::Error;

pub use config::ExperimentConfig;
pub use sweep::{run_sweep, SweepRecord};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, config or input files (exit 2).
    #[error("{0}")]
    Invalid(String),

    /// A check ran and failed (exit 1).
    #[error("{0}")]
    CheckFailed(String),

    #[error(transparent)]
    Core(#[from] marnet_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Invalid(format!("csv: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses a float, also accepting `pi`, `pi/k` and `k*pi`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let pi = std::f64::consts::PI;
    if s == "pi" {
        return Some(pi);
    }
    if let Some(d) = s.strip_prefix("pi/") {
        return d.trim().parse::<f64>().ok().map(|d| pi / d);
    }
    if let Some(k) = s.strip_suffix("*pi") {
        return k.trim().parse::<f64>().ok().map(|k| k * pi);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_with_pi() {
        assert_eq!(parse_real("0.25"), Some(0.25));
        assert_eq!(parse_real("pi/2"), Some(std::f64::consts::FRAC_PI_2));
        assert_eq!(parse_real("2*pi"), Some(2.0 * std::f64::consts::PI));
        assert_eq!(parse_real("half"), None);
    }
}
