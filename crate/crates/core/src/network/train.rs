use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{backward_batch, mean_loss, LossKind, Network, Penalty};
use crate::dataset::Dataset;
use crate::diversity::{DiversityStats, MarConfig};
use crate::error::{Error, Result};

/// Plain minibatch SGD settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lambda: f64,
    pub mar: MarConfig,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            mar: MarConfig::default(),
            learning_rate: 0.1,
            batch_size: 100,
            epochs: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn penalty(&self) -> Penalty {
        Penalty {
            lambda: self.lambda,
            mar: self.mar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(
                "learning_rate",
                format!("must be > 0, got {}", self.learning_rate),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        self.mar.validate()
    }
}

/// State after one epoch, measured on the full training set.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
    pub mean_loss: f64,
    /// One entry per hidden layer; `None` for layers with a single unit.
    pub hidden_stats: Vec<Option<DiversityStats>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub network: Network,
    pub trace: Vec<EpochRecord>,
}

/// Minimizes the MAR-penalized objective with minibatch SGD.
///
/// The shuffle order comes from a ChaCha stream keyed by `cfg.seed`, so a
/// fixed config reproduces the same weights bit for bit.
pub fn train(net: &Network, data: &Dataset, kind: LossKind, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let penalty = cfg.penalty();
    let mut net = net.clone();
    // validates shapes and labels up front
    mean_loss(&net, data, kind)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let grads = backward_batch(&net, data, batch, kind, &penalty)?;
            for (layer, g) in net.layers_mut().iter_mut().zip(&grads) {
                layer.add_scaled(-cfg.learning_rate, g);
            }
            if !net.layers().iter().all(|l| l.is_finite()) {
                return Err(Error::Divergence { epoch });
            }
        }
        let loss = mean_loss(&net, data, kind)?;
        let objective = if cfg.lambda == 0.0 {
            loss
        } else {
            loss - cfg.lambda * net.mar_sum(&cfg.mar)?
        };
        if !objective.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        trace.push(EpochRecord {
            epoch,
            objective,
            mean_loss: loss,
            hidden_stats: net.hidden_stats(),
        });
    }
    Ok(TrainOutcome { network: net, trace })
}
