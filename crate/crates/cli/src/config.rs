//! `key = value` experiment configs.
//!
//! ```text
//! # long-tail classification, one hidden layer
//! dataset = longtail
//! hidden = 32
//! loss = cross_entropy
//! lambda_grid = 0, 0.001, 0.01
//! seeds = 0, 1, 2
//! output = sweep.csv
//! ```
//!
//! Blank lines and `#` comments are ignored; lists are comma separated.
//! Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use marnet_core::{ActivationKind, LossKind};

use crate::{parse_real, CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    LongTail,
    Regression,
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DataSource,
    pub samples: usize,
    pub data_seed: u64,
    pub dim: usize,
    pub classes: usize,
    pub tail_exponent: f64,
    pub center_scale: f64,
    pub noise_scale: f64,
    pub input_bound: f64,
    pub append_bias: bool,
    pub num_terms: usize,
    pub freq_scale: f64,
    pub noise_sd: f64,
    pub hidden: Vec<usize>,
    pub activation: ActivationKind,
    pub loss: LossKind,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub gamma: f64,
    pub lambda_grid: Vec<f64>,
    pub tau: f64,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DataSource::LongTail,
            samples: 2000,
            data_seed: 0,
            dim: 10,
            classes: 10,
            tail_exponent: 1.0,
            center_scale: 1.0,
            noise_scale: 0.5,
            input_bound: 4.0,
            append_bias: true,
            num_terms: 5,
            freq_scale: 1.0,
            noise_sd: 0.0,
            hidden: vec![32],
            activation: ActivationKind::Relu,
            loss: LossKind::CrossEntropy,
            learning_rate: 0.05,
            batch_size: 50,
            epochs: 20,
            gamma: 1.0,
            lambda_grid: vec![0.0],
            tau: 0.9,
            seeds: vec![0],
            output: None,
            checkpoint_dir: None,
        }
    }
}

fn invalid(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("config line {line}: {msg}"))
}

fn scalar<T: FromStr>(line: usize, key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| invalid(line, format!("`{key}` has invalid value `{v}`")))
}

fn real(line: usize, key: &str, v: &str) -> CliResult<f64> {
    parse_real(v).ok_or_else(|| invalid(line, format!("`{key}` has invalid value `{v}`")))
}

fn list<T>(line: usize, key: &str, v: &str, item: impl Fn(&str) -> Option<T>) -> CliResult<Vec<T>> {
    v.split(',')
        .map(|s| item(s.trim()).ok_or_else(|| invalid(line, format!("`{key}` has invalid entry `{}`", s.trim()))))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| invalid(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, v) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(invalid(line, format!("`{key}` already set on line {prev}")));
            }
            match key {
                "dataset" => {
                    cfg.dataset = match v {
                        "longtail" => DataSource::LongTail,
                        "regression" => DataSource::Regression,
                        _ => match v.strip_prefix("csv:") {
                            Some(p) => DataSource::Csv(PathBuf::from(p.trim())),
                            None => {
                                return Err(invalid(
                                    line,
                                    format!("`dataset` must be longtail, regression or csv:<path>, got `{v}`"),
                                ))
                            }
                        },
                    }
                }
                "samples" => cfg.samples = scalar(line, key, v)?,
                "data_seed" => cfg.data_seed = scalar(line, key, v)?,
                "dim" => cfg.dim = scalar(line, key, v)?,
                "classes" => cfg.classes = scalar(line, key, v)?,
                "tail_exponent" => cfg.tail_exponent = real(line, key, v)?,
                "center_scale" => cfg.center_scale = real(line, key, v)?,
                "noise_scale" => cfg.noise_scale = real(line, key, v)?,
                "input_bound" => cfg.input_bound = real(line, key, v)?,
                "append_bias" => cfg.append_bias = scalar(line, key, v)?,
                "num_terms" => cfg.num_terms = scalar(line, key, v)?,
                "freq_scale" => cfg.freq_scale = real(line, key, v)?,
                "noise_sd" => cfg.noise_sd = real(line, key, v)?,
                "hidden" => cfg.hidden = list(line, key, v, |s| s.parse().ok())?,
                "activation" => cfg.activation = scalar(line, key, v)?,
                "loss" => cfg.loss = scalar(line, key, v)?,
                "learning_rate" => cfg.learning_rate = real(line, key, v)?,
                "batch_size" => cfg.batch_size = scalar(line, key, v)?,
                "epochs" => cfg.epochs = scalar(line, key, v)?,
                "gamma" => cfg.gamma = real(line, key, v)?,
                "lambda_grid" => cfg.lambda_grid = list(line, key, v, parse_real)?,
                "tau" => cfg.tau = real(line, key, v)?,
                "seeds" => cfg.seeds = list(line, key, v, |s| s.parse().ok())?,
                "output" => cfg.output = Some(PathBuf::from(v)),
                "checkpoint_dir" => cfg.checkpoint_dir = Some(PathBuf::from(v)),
                _ => return Err(invalid(line, format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Invalid(m));
        if self.lambda_grid.is_empty() {
            return bad("lambda_grid must not be empty".into());
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lambda_grid must be strictly ascending".into());
        }
        if self.lambda_grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return bad("lambda_grid entries must be finite and >= 0".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h < 2) {
            return bad("hidden must list at least one layer, each with >= 2 units".into());
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if self.samples < 4 {
            return bad("samples must be >= 4".into());
        }
        match (&self.dataset, self.loss) {
            (DataSource::Regression, LossKind::Squared) => {}
            (DataSource::Regression, other) => {
                return bad(format!("regression data needs loss = squared, got {}", other.name()))
            }
            (DataSource::LongTail, LossKind::Squared) => {
                return bad("longtail data needs a classification loss".into())
            }
            (DataSource::LongTail, LossKind::Logistic | LossKind::Hinge) if self.classes != 2 => {
                return bad("logistic and hinge losses need classes = 2".into())
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::parse(
            "# comment\n\ndataset = longtail\nhidden = 16, 8\nloss = xent  # trailing\nlambda_grid = 0, 1e-3, 0.1\nseeds = 3,4\ntau = 0.75\noutput = out.csv\n",
        )
        .unwrap();
        assert_eq!(cfg.hidden, vec![16, 8]);
        assert_eq!(cfg.loss, LossKind::CrossEntropy);
        assert_eq!(cfg.lambda_grid, vec![0.0, 1e-3, 0.1]);
        assert_eq!(cfg.seeds, vec![3, 4]);
        assert_eq!(cfg.output, Some(PathBuf::from("out.csv")));
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::parse("seeds = 1\nbogus = 3\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("bogus"), "{err}");
        let err = ExperimentConfig::parse("tau = 0.5\ntau = 0.6\n").unwrap_err().to_string();
        assert!(err.contains("already set on line 1"), "{err}");
        let err = ExperimentConfig::parse("epochs = ten\n").unwrap_err().to_string();
        assert!(err.contains("epochs"), "{err}");
    }

    #[test]
    fn rejects_invalid_grids() {
        assert!(ExperimentConfig::parse("lambda_grid = 0.1, 0.01\n").is_err());
        assert!(ExperimentConfig::parse("seeds = \n").is_err());
        assert!(ExperimentConfig::parse("dataset = regression\nloss = hinge\n").is_err());
        assert!(ExperimentConfig::parse("hidden = 1\n").is_err());
    }

    #[test]
    fn csv_source() {
        let cfg = ExperimentConfig::parse("dataset = csv:data/x.csv\n").unwrap();
        assert_eq!(cfg.dataset, DataSource::Csv(PathBuf::from("data/x.csv")));
    }
}
