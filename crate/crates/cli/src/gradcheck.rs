//! Central finite-difference check of the backprop gradient of the full
//! penalized objective.

use marnet_core::network::{backward, objective};
use marnet_core::{ActivationKind, ComponentMatrix, Dataset, LossKind, MarConfig, Network, Penalty};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliResult;

/// Largest accepted relative error.
pub const TOLERANCE: f64 = 1e-4;

const STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckSpec {
    pub shape: Vec<usize>,
    pub loss: LossKind,
    pub activation: ActivationKind,
    pub lambda: f64,
    pub gamma: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for GradcheckSpec {
    fn default() -> Self {
        Self {
            shape: vec![4, 5, 3],
            loss: LossKind::CrossEntropy,
            activation: ActivationKind::Tanh,
            lambda: 0.0,
            gamma: 1.0,
            samples: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub max_rel_error: f64,
    pub entries: usize,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < TOLERANCE
    }
}

/// `|a - b| / max(|a|, |b|, 1)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Random inputs and labels valid for `loss`.
pub fn random_data(spec: &GradcheckSpec) -> CliResult<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(2);
    let d = spec.shape[0];
    let k = *spec.shape.last().unwrap_or(&1);
    let mut rows = Vec::with_capacity(spec.samples);
    let mut y = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        rows.push((0..d).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>());
        y.push(match spec.loss {
            LossKind::Squared => rng.random_range(-1.0..1.0),
            LossKind::Logistic | LossKind::Hinge => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            LossKind::CrossEntropy => rng.random_range(0..k) as f64,
        });
    }
    Ok(Dataset::from_rows(&rows, y)?)
}

pub fn gradcheck(spec: &GradcheckSpec) -> CliResult<GradcheckReport> {
    gradcheck_with(spec, |_| {})
}

/// Like [`gradcheck`], but `hook` may alter the analytic gradient before the
/// comparison (used to confirm that a broken gradient is caught).
pub fn gradcheck_with(spec: &GradcheckSpec, hook: impl Fn(&mut [ComponentMatrix])) -> CliResult<GradcheckReport> {
    let net = Network::init(&spec.shape, spec.activation, spec.seed)?;
    let data = random_data(spec)?;
    let penalty = Penalty {
        lambda: spec.lambda,
        mar: MarConfig::with_gamma(spec.gamma)?,
    };
    let mut analytic = backward(&net, &data, spec.loss, &penalty)?;
    hook(&mut analytic);

    let mut probe = net.clone();
    let mut max_rel_error = 0.0f64;
    let mut entries = 0;
    for (li, g) in analytic.iter().enumerate() {
        for idx in 0..g.as_slice().len() {
            let orig = probe.layers()[li].as_slice()[idx];
            probe.layers_mut()[li].as_mut_slice()[idx] = orig + STEP;
            let up = objective(&probe, &data, spec.loss, &penalty)?;
            probe.layers_mut()[li].as_mut_slice()[idx] = orig - STEP;
            let down = objective(&probe, &data, spec.loss, &penalty)?;
            probe.layers_mut()[li].as_mut_slice()[idx] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            max_rel_error = max_rel_error.max(relative_error(g.as_slice()[idx], numeric));
            entries += 1;
        }
    }
    Ok(GradcheckReport { max_rel_error, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_net_passes_with_and_without_penalty() {
        for lambda in [0.0, 0.5] {
            let r = gradcheck(&GradcheckSpec { lambda, ..Default::default() }).unwrap();
            assert!(r.passed(), "lambda {lambda}: {r:?}");
            assert_eq!(r.entries, 4 * 5 + 5 * 3);
        }
    }

    #[test]
    fn corrupted_gradient_fails() {
        let r = gradcheck_with(&GradcheckSpec::default(), |g| {
            let v = g[0].get(0, 0);
            g[0].set(0, 0, v + 0.01);
        })
        .unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn every_loss_passes() {
        for (loss, out) in [
            (LossKind::Squared, 1),
            (LossKind::Logistic, 1),
            (LossKind::Hinge, 1),
            (LossKind::CrossEntropy, 4),
        ] {
            let spec = GradcheckSpec { shape: vec![3, 6, 4, out], loss, lambda: 0.2, seed: 3, ..Default::default() };
            let r = gradcheck(&spec).unwrap();
            assert!(r.passed(), "{loss:?}: {r:?}");
        }
    }
}
