//! λ sweeps: train one network per (seed, λ) cell and tabulate held-out
//! loss, accuracy and hidden-layer angle statistics.
//!
//! Cells run in parallel but each is single-threaded and seeded, and rows
//! are emitted in (seed, λ) order, so the CSV is a pure function of the
//! config. Wall-clock time goes to a separate timing file for that reason.

use std::path::{Path, PathBuf};
use std::time::Instant;

use marnet_core::datagen::{self, MixtureSpec};
use marnet_core::diversity::{estimate_theta, ChebyshevQuery};
use marnet_core::matrix::format_float;
use marnet_core::network::{evaluate, train};
use marnet_core::{Dataset, DiversityStats, Error, LossKind, MarConfig, Network, TrainConfig};
use rayon::prelude::*;

use crate::config::{DataSource, ExperimentConfig};
use crate::{io, CliError, CliResult};

/// Share of each dataset used for training; the rest is held out.
pub const TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub seed: u64,
    pub lambda: f64,
    pub diverged: bool,
    pub train_loss: f64,
    pub test_loss: f64,
    /// Held-out accuracy for classification losses.
    pub accuracy: Option<f64>,
    /// Smallest per-layer Chebyshev angle estimate.
    pub theta_hat: f64,
    pub layer_stats: Vec<DiversityStats>,
    pub layer_theta_hat: Vec<f64>,
    pub wall_seconds: f64,
    /// Trained weights; `None` when training diverged.
    pub network: Option<Network>,
}

/// Builds the dataset described by `cfg` and the matching output width.
pub fn build_dataset(cfg: &ExperimentConfig) -> CliResult<(Dataset, usize)> {
    match &cfg.dataset {
        DataSource::LongTail => {
            let spec = MixtureSpec {
                num_classes: cfg.classes,
                dim: cfg.dim,
                tail_exponent: cfg.tail_exponent,
                center_scale: cfg.center_scale,
                noise_scale: cfg.noise_scale,
                input_bound: cfg.input_bound,
                append_bias: cfg.append_bias,
            };
            let data = datagen::sample_longtail_classification(&spec, cfg.samples, cfg.data_seed)?;
            match cfg.loss {
                LossKind::CrossEntropy => Ok((data, cfg.classes)),
                _ => {
                    // two classes: head class is +1, tail class -1
                    let rows: Vec<Vec<f64>> = (0..data.len()).map(|i| data.input(i).to_vec()).collect();
                    let y = data.targets().iter().map(|&c| if c == 0.0 { 1.0 } else { -1.0 }).collect();
                    Ok((Dataset::from_rows(&rows, y)?, 1))
                }
            }
        }
        DataSource::Regression => {
            let target = datagen::barron_target(cfg.data_seed, cfg.dim, cfg.num_terms, cfg.freq_scale)?;
            let sample = datagen::sample_regression(
                &target,
                cfg.samples,
                cfg.input_bound,
                cfg.noise_sd,
                cfg.data_seed.wrapping_add(1),
            )?;
            Ok((sample.data, 1))
        }
        DataSource::Csv(path) => {
            let data = io::read_dataset(path)?;
            let out = match cfg.loss {
                LossKind::CrossEntropy => {
                    let max = data.targets().iter().fold(0.0f64, |m, &y| m.max(y));
                    max as usize + 1
                }
                _ => 1,
            };
            Ok((data, out))
        }
    }
}

fn run_cell(cfg: &ExperimentConfig, data: &Dataset, out_dim: usize, seed: u64, lambda: f64) -> CliResult<SweepRecord> {
    let start = Instant::now();
    let (train_set, test_set) = data.split(TRAIN_FRACTION, seed)?;
    let mut shape = vec![data.dim()];
    shape.extend(&cfg.hidden);
    shape.push(out_dim);
    let net = Network::init(&shape, cfg.activation, seed)?;
    let tc = TrainConfig {
        lambda,
        mar: MarConfig::with_gamma(cfg.gamma)?,
        learning_rate: cfg.learning_rate,
        batch_size: cfg.batch_size,
        epochs: cfg.epochs,
        seed,
    };
    let query = ChebyshevQuery::new(cfg.tau)?;
    let hidden = cfg.hidden.len();
    let nan_stats = DiversityStats {
        mean: f64::NAN,
        variance: f64::NAN,
        min_angle: f64::NAN,
    };

    let record = match train(&net, &train_set, cfg.loss, &tc) {
        Ok(outcome) => {
            let net = outcome.network;
            let tr = evaluate(&net, &train_set, cfg.loss)?;
            let te = evaluate(&net, &test_set, cfg.loss)?;
            let layer_stats = net
                .hidden_stats()
                .into_iter()
                .map(|s| s.unwrap_or(nan_stats))
                .collect();
            let layer_theta_hat = net
                .hidden_layers()
                .iter()
                .map(|a| estimate_theta(a, query))
                .collect::<Result<Vec<_>, _>>()?;
            SweepRecord {
                seed,
                lambda,
                diverged: false,
                train_loss: tr.mean_loss,
                test_loss: te.mean_loss,
                accuracy: te.accuracy,
                theta_hat: layer_theta_hat.iter().copied().fold(f64::INFINITY, f64::min),
                layer_stats,
                layer_theta_hat,
                wall_seconds: 0.0,
                network: Some(net),
            }
        }
        Err(Error::Divergence { .. }) => SweepRecord {
            seed,
            lambda,
            diverged: true,
            train_loss: f64::NAN,
            test_loss: f64::NAN,
            accuracy: cfg.loss.is_classification().then_some(f64::NAN),
            theta_hat: f64::NAN,
            layer_stats: vec![nan_stats; hidden],
            layer_theta_hat: vec![f64::NAN; hidden],
            wall_seconds: 0.0,
            network: None,
        },
        Err(e) => return Err(e.into()),
    };
    Ok(SweepRecord {
        wall_seconds: start.elapsed().as_secs_f64(),
        ..record
    })
}

/// Trains every (seed, λ) cell; rows come back sorted by seed, then λ.
pub fn run_sweep(cfg: &ExperimentConfig) -> CliResult<Vec<SweepRecord>> {
    cfg.validate()?;
    let (data, out_dim) = build_dataset(cfg)?;
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let cells: Vec<(u64, f64)> = seeds
        .iter()
        .flat_map(|&s| cfg.lambda_grid.iter().map(move |&l| (s, l)))
        .collect();
    cells
        .par_iter()
        .map(|&(seed, lambda)| run_cell(cfg, &data, out_dim, seed, lambda))
        .collect()
}

pub fn header(hidden_layers: usize) -> Vec<String> {
    let mut h: Vec<String> = ["seed", "lambda", "diverged", "train_loss", "test_loss", "accuracy", "theta_hat"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for l in 0..hidden_layers {
        for col in ["mean_angle", "angle_variance", "min_angle", "theta_hat"] {
            h.push(format!("layer{l}_{col}"));
        }
    }
    h
}

/// Main sweep table. Regression runs leave `accuracy` empty.
pub fn sweep_csv(records: &[SweepRecord], hidden_layers: usize) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(hidden_layers))?;
    for r in records {
        let mut row = vec![
            r.seed.to_string(),
            format_float(r.lambda),
            r.diverged.to_string(),
            format_float(r.train_loss),
            format_float(r.test_loss),
            r.accuracy.map(format_float).unwrap_or_default(),
            format_float(r.theta_hat),
        ];
        for (s, t) in r.layer_stats.iter().zip(&r.layer_theta_hat) {
            row.extend([s.mean, s.variance, s.min_angle, *t].map(format_float));
        }
        w.write_record(row)?;
    }
    into_string(w)
}

pub fn timing_csv(records: &[SweepRecord]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seed", "lambda", "wall_seconds"])?;
    for r in records {
        w.write_record([r.seed.to_string(), format_float(r.lambda), format!("{:.6}", r.wall_seconds)])?;
    }
    into_string(w)
}

pub(crate) fn into_string(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Invalid(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Invalid(format!("csv: {e}")))
}

/// `seed{seed}_lambda{λ}.ckpt`.
pub fn checkpoint_name(seed: u64, lambda: f64) -> String {
    format!("seed{seed}_lambda{}.ckpt", format_float(lambda))
}

/// Sidecar path for wall-clock timings: `out.csv` becomes `out.timing.csv`.
pub fn timing_path(output: &Path) -> PathBuf {
    output.with_extension("timing.csv")
}

/// Writes checkpoints for every converged cell into `dir`.
pub fn write_checkpoints(records: &[SweepRecord], dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for r in records {
        if let Some(net) = &r.network {
            io::save_checkpoint(net, &dir.join(checkpoint_name(r.seed, r.lambda)))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            samples: 200,
            dim: 4,
            classes: 3,
            hidden: vec![5],
            epochs: 3,
            batch_size: 20,
            lambda_grid: vec![0.0, 0.1],
            seeds: vec![2, 1],
            ..Default::default()
        }
    }

    #[test]
    fn rows_are_ordered_and_complete() {
        let recs = run_sweep(&small()).unwrap();
        let keys: Vec<(u64, f64)> = recs.iter().map(|r| (r.seed, r.lambda)).collect();
        assert_eq!(keys, vec![(1, 0.0), (1, 0.1), (2, 0.0), (2, 0.1)]);
        for r in &recs {
            let acc = r.accuracy.unwrap();
            assert!((0.0..=1.0).contains(&acc));
            assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&r.theta_hat));
        }
    }

    #[test]
    fn zero_lambda_matches_plain_training() {
        let cfg = ExperimentConfig { lambda_grid: vec![0.0], seeds: vec![7], ..small() };
        let rec = &run_sweep(&cfg).unwrap()[0];
        let (data, k) = build_dataset(&cfg).unwrap();
        let (tr, te) = data.split(TRAIN_FRACTION, 7).unwrap();
        let net = Network::init(&[data.dim(), 5, k], cfg.activation, 7).unwrap();
        let tc = TrainConfig { learning_rate: cfg.learning_rate, batch_size: 20, epochs: 3, seed: 7, ..Default::default() };
        let plain = train(&net, &tr, cfg.loss, &tc).unwrap().network;
        assert_eq!(rec.network.as_ref(), Some(&plain));
        assert_eq!(rec.test_loss, evaluate(&plain, &te, cfg.loss).unwrap().mean_loss);
    }

    #[test]
    fn diverged_rows_are_kept() {
        let cfg = ExperimentConfig {
            dataset: DataSource::Regression,
            loss: LossKind::Squared,
            activation: marnet_core::ActivationKind::Tanh,
            input_bound: 50.0,
            noise_sd: 1e6,
            learning_rate: 1e3,
            batch_size: 1,
            lambda_grid: vec![0.0],
            seeds: vec![0],
            ..small()
        };
        let recs = run_sweep(&cfg).unwrap();
        assert!(recs[0].diverged && recs[0].train_loss.is_nan() && recs[0].network.is_none());
        let text = sweep_csv(&recs, 1).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("0,0,true,NaN,NaN,,NaN"), "{row}");
    }

    #[test]
    fn golden_header() {
        assert_eq!(
            header(2).join(","),
            "seed,lambda,diverged,train_loss,test_loss,accuracy,theta_hat,\
             layer0_mean_angle,layer0_angle_variance,layer0_min_angle,layer0_theta_hat,\
             layer1_mean_angle,layer1_angle_variance,layer1_min_angle,layer1_theta_hat"
        );
    }

    #[test]
    fn binary_longtail_maps_head_class_to_plus_one() {
        let cfg = ExperimentConfig { classes: 2, loss: LossKind::Hinge, ..small() };
        let (data, k) = build_dataset(&cfg).unwrap();
        assert_eq!(k, 1);
        assert!(data.targets().iter().all(|&y| y == 1.0 || y == -1.0));
    }
}
