//! Feed-forward networks without bias terms and the MAR-penalized objective.
//!
//! Layer `i` is a `ComponentMatrix` `A_i` of shape `(width_i, width_{i+1})`
//! whose columns are the incoming weight vectors of the units of layer `i+1`.
//! The activation is applied after every layer except the last, which is
//! linear. The training objective is
//!
//! ```text
//! mean loss - λ · Σ_{i=0}^{l-2} Ω(A_i)
//! ```
//!
//! so the output layer is never regularized.

mod activation;
pub mod checkpoint;
mod loss;
mod train;

pub use activation::{Activation, ActivationKind};
pub use loss::{loss, loss_gradient, predict_label, LossKind};
pub use train::{train, EpochRecord, TrainConfig, TrainOutcome};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::diversity::{angle_stats, mar_gradient, mar_value, DiversityStats, MarConfig};
use crate::error::{Error, Result};
use crate::matrix::ComponentMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<ComponentMatrix>,
    activation: Activation,
}

/// Penalty part of the objective: `λ` and the MAR settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub lambda: f64,
    pub mar: MarConfig,
}

impl Penalty {
    pub fn none() -> Self {
        Self {
            lambda: 0.0,
            mar: MarConfig::default(),
        }
    }
}

impl Network {
    pub fn new(layers: Vec<ComponentMatrix>, activation: impl Into<Activation>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::invalid(
                "layers",
                format!("need at least one hidden layer (2 weight matrices), got {}", layers.len()),
            ));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].cols() != pair[1].rows() {
                return Err(Error::invalid(
                    "layers",
                    format!(
                        "layer {i} has {} units but layer {} expects {} inputs",
                        pair[0].cols(),
                        i + 1,
                        pair[1].rows()
                    ),
                ));
            }
        }
        if let Some(i) = layers.iter().position(|l| l.rows() == 0 || l.cols() == 0) {
            return Err(Error::invalid("layers", format!("layer {i} is empty")));
        }
        Ok(Self {
            layers,
            activation: activation.into(),
        })
    }

    /// Uniform init in `[-1/√fan_in, 1/√fan_in]`. `sizes` lists every layer
    /// width from the input to the output.
    pub fn init(sizes: &[usize], activation: impl Into<Activation>, seed: u64) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(Error::invalid(
                "shape",
                "needs input, at least one hidden and an output width",
            ));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("shape", "widths must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                let data = (0..w[0] * w[1]).map(|_| rng.random_range(-bound..=bound)).collect();
                ComponentMatrix::from_col_major(w[0], w[1], data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers, activation)
    }

    pub fn layers(&self) -> &[ComponentMatrix] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [ComponentMatrix] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].cols()
    }

    /// Widths from input to output.
    pub fn shape(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(ComponentMatrix::cols))
            .collect()
    }

    /// Hidden weight matrices `A_0 … A_{l-2}`.
    pub fn hidden_layers(&self) -> &[ComponentMatrix] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn output_layer(&self) -> &ComponentMatrix {
        &self.layers[self.layers.len() - 1]
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            a = layer.transpose_mul(&a)?;
            if i < last {
                a.iter_mut().for_each(|z| *z = self.activation.apply(*z));
            }
        }
        Ok(a)
    }

    /// Per-layer activations (index 0 is the input) and hidden pre-activations.
    fn forward_trace(&self, x: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let last = self.layers.len() - 1;
        let mut acts = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(last);
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.transpose_mul(&acts[i])?;
            if i < last {
                acts.push(z.iter().map(|&v| self.activation.apply(v)).collect());
                pre.push(z);
            } else {
                acts.push(z);
            }
        }
        Ok((acts, pre))
    }

    /// `Σ Ω(A_i)` over the hidden layers.
    pub fn mar_sum(&self, mar: &MarConfig) -> Result<f64> {
        self.hidden_layers().iter().map(|a| mar_value(a, mar)).sum()
    }

    pub fn hidden_stats(&self) -> Vec<Option<DiversityStats>> {
        self.hidden_layers().iter().map(|a| angle_stats(a).ok()).collect()
    }
}

fn check_data(net: &Network, data: &Dataset, kind: LossKind) -> Result<()> {
    if data.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            actual: data.dim(),
        });
    }
    data.targets()
        .iter()
        .try_for_each(|&y| kind.check_target(net.output_dim(), y))
}

pub fn mean_loss(net: &Network, data: &Dataset, kind: LossKind) -> Result<f64> {
    check_data(net, data, kind)?;
    let mut total = 0.0;
    for i in 0..data.len() {
        total += loss(kind, &net.forward(data.input(i))?, data.target(i))?;
    }
    Ok(total / data.len() as f64)
}

/// Mean loss minus `λ` times the MAR of every hidden layer.
pub fn objective(net: &Network, data: &Dataset, kind: LossKind, penalty: &Penalty) -> Result<f64> {
    let base = mean_loss(net, data, kind)?;
    if penalty.lambda == 0.0 {
        return Ok(base);
    }
    Ok(base - penalty.lambda * net.mar_sum(&penalty.mar)?)
}

/// Gradient of the objective restricted to the samples in `batch`.
pub fn backward_batch(
    net: &Network,
    data: &Dataset,
    batch: &[usize],
    kind: LossKind,
    penalty: &Penalty,
) -> Result<Vec<ComponentMatrix>> {
    if batch.is_empty() {
        return Err(Error::invalid("batch", "must not be empty"));
    }
    if data.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            actual: data.dim(),
        });
    }
    let l = net.layers.len();
    let mut grads: Vec<ComponentMatrix> = net
        .layers
        .iter()
        .map(|a| ComponentMatrix::zeros(a.rows(), a.cols()))
        .collect();

    for &s in batch {
        let (acts, pre) = net.forward_trace(data.input(s))?;
        let mut delta = loss_gradient(kind, &acts[l], data.target(s))?;
        for i in (0..l).rev() {
            let g = &mut grads[i];
            for (j, &dj) in delta.iter().enumerate() {
                if dj != 0.0 {
                    for (gr, a) in g.column_mut(j).iter_mut().zip(&acts[i]) {
                        *gr += dj * a;
                    }
                }
            }
            if i > 0 {
                let back = net.layers[i].mul(&delta)?;
                delta = back
                    .iter()
                    .zip(&pre[i - 1])
                    .map(|(b, &z)| b * net.activation.derivative(z))
                    .collect();
            }
        }
    }
    let inv = 1.0 / batch.len() as f64;
    grads.iter_mut().for_each(|g| g.scale(inv));

    if penalty.lambda != 0.0 {
        for (g, a) in grads.iter_mut().zip(net.hidden_layers()) {
            g.add_scaled(-penalty.lambda, &mar_gradient(a, &penalty.mar)?);
        }
    }
    Ok(grads)
}

/// Gradient of the objective over the whole dataset.
pub fn backward(
    net: &Network,
    data: &Dataset,
    kind: LossKind,
    penalty: &Penalty,
) -> Result<Vec<ComponentMatrix>> {
    let all: Vec<usize> = (0..data.len()).collect();
    backward_batch(net, data, &all, kind, penalty)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub mean_loss: f64,
    /// Present for classification losses.
    pub accuracy: Option<f64>,
}

pub fn evaluate(net: &Network, data: &Dataset, kind: LossKind) -> Result<Evaluation> {
    check_data(net, data, kind)?;
    let mut total = 0.0;
    let mut correct = 0usize;
    for i in 0..data.len() {
        let f = net.forward(data.input(i))?;
        total += loss(kind, &f, data.target(i))?;
        if predict_label(kind, &f) == Some(data.target(i)) {
            correct += 1;
        }
    }
    let n = data.len() as f64;
    Ok(Evaluation {
        mean_loss: total / n,
        accuracy: kind.is_classification().then(|| correct as f64 / n),
    })
}
