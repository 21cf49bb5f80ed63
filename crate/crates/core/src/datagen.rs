//! Seeded synthetic data.
//!
//! Regression targets are finite sine sums `g(x) = Σ β_k sin(ω_k·x)`; their
//! Fourier first moment is exactly `Σ |β_k|‖ω_k‖`. Classification data is a
//! Gaussian mixture with power-law class frequencies.
//!
//! Every generator is a pure function of its arguments and seed.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matrix::{dot, norm};

#[derive(Debug, Clone, PartialEq)]
pub struct SineTerm {
    pub amplitude: f64,
    pub frequency: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarronTarget {
    dim: usize,
    terms: Vec<SineTerm>,
}

impl BarronTarget {
    pub fn new(terms: Vec<SineTerm>) -> Result<Self> {
        let dim = terms
            .first()
            .map(|t| t.frequency.len())
            .ok_or_else(|| Error::invalid("num_terms", "must be >= 1"))?;
        if dim == 0 {
            return Err(Error::invalid("d", "must be >= 1"));
        }
        for t in &terms {
            if t.frequency.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: t.frequency.len(),
                });
            }
            if !t.amplitude.is_finite() || t.frequency.iter().any(|w| !w.is_finite()) {
                return Err(Error::invalid("terms", "must be finite"));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[SineTerm] {
        &self.terms
    }

    /// `Σ |β_k|·‖ω_k‖₂`.
    pub fn moment_estimate(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs() * norm(&t.frequency)).sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude * dot(&t.frequency, x).sin())
            .sum()
    }
}

/// Random sine sum: amplitudes uniform in `[-1, 1]`, frequency entries
/// Gaussian with standard deviation `freq_scale`.
pub fn barron_target(seed: u64, d: usize, num_terms: usize, freq_scale: f64) -> Result<BarronTarget> {
    if num_terms == 0 {
        return Err(Error::invalid("num_terms", "must be >= 1"));
    }
    if !(freq_scale >= 0.0 && freq_scale.is_finite()) {
        return Err(Error::invalid("freq_scale", format!("must be >= 0, got {freq_scale}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..num_terms)
        .map(|_| SineTerm {
            amplitude: rng.random_range(-1.0..=1.0),
            frequency: (0..d)
                .map(|_| freq_scale * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        })
        .collect();
    BarronTarget::new(terms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    pub data: Dataset,
    /// `max |y|` over the sample.
    pub achieved_c2: f64,
}

/// Dimension above which ball sampling switches from rejection to
/// direction times `U^{1/d}` radius; the acceptance rate of rejection
/// sampling falls below 2% past this point.
const REJECTION_MAX_DIM: usize = 8;

fn sample_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    if d <= REJECTION_MAX_DIM {
        loop {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
            if dot(&x, &x) <= 1.0 {
                return x.into_iter().map(|v| v * radius).collect();
            }
        }
    }
    let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let n = norm(&g);
    if n == 0.0 {
        return vec![0.0; d];
    }
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    clip_to_ball(g.into_iter().map(|v| v / n * r).collect(), radius)
}

/// Shrinks `x` onto the closed ball of radius `r`, guaranteeing `‖x‖ ≤ r` in
/// floating point.
fn clip_to_ball(mut x: Vec<f64>, r: f64) -> Vec<f64> {
    let mut n = norm(&x);
    if n <= r {
        return x;
    }
    if r == 0.0 {
        return vec![0.0; x.len()];
    }
    let s = r / n;
    x.iter_mut().for_each(|v| *v *= s);
    n = norm(&x);
    while n > r {
        x.iter_mut().for_each(|v| *v *= 1.0 - f64::EPSILON);
        n = norm(&x);
    }
    x
}

/// Inputs uniform in the ball of radius `c1`, targets `g(x)` plus Gaussian
/// noise.
pub fn sample_regression(
    target: &BarronTarget,
    n: usize,
    c1: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<RegressionSample> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::invalid("c1", format!("must be > 0, got {c1}")));
    }
    let noise = Normal::new(0.0, noise_sd)
        .map_err(|_| Error::invalid("noise_sd", format!("must be >= 0, got {noise_sd}")))?;
    let d = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n * d);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x = sample_ball(&mut rng, d, c1);
        let y = target.eval(&x) + if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        inputs.extend_from_slice(&x);
        targets.push(y);
    }
    let data = Dataset::new(d, inputs, targets)?;
    let achieved_c2 = data.max_abs_target();
    Ok(RegressionSample { data, achieved_c2 })
}

/// Gaussian mixture with class `k` drawn with probability `∝ (k+1)^(-s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub num_classes: usize,
    pub dim: usize,
    /// Power-law exponent `s ≥ 0`; 0 gives balanced classes.
    pub tail_exponent: f64,
    /// Standard deviation of the class-center coordinates.
    pub center_scale: f64,
    /// Isotropic within-class standard deviation.
    pub noise_scale: f64,
    /// Every emitted input has `‖x‖₂ ≤ input_bound`.
    pub input_bound: f64,
    /// Append a constant-1 feature (counted against `input_bound`).
    pub append_bias: bool,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::invalid("num_classes", "must be >= 2"));
        }
        if self.dim == 0 {
            return Err(Error::invalid("d", "must be >= 1"));
        }
        for (name, v) in [
            ("tail_exponent", self.tail_exponent),
            ("center_scale", self.center_scale),
            ("noise_scale", self.noise_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        let min_bound = if self.append_bias { 1.0 } else { 0.0 };
        if !(self.input_bound > min_bound && self.input_bound.is_finite()) {
            return Err(Error::invalid(
                "input_bound",
                format!("must be finite and > {min_bound}, got {}", self.input_bound),
            ));
        }
        Ok(())
    }

    /// Normalized class probabilities, heaviest first.
    pub fn class_weights(&self) -> Vec<f64> {
        let raw: Vec<f64> = (1..=self.num_classes)
            .map(|k| (k as f64).powf(-self.tail_exponent))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    /// Width of each emitted row.
    pub fn input_dim(&self) -> usize {
        self.dim + usize::from(self.append_bias)
    }
}

/// Labels are class indices `0..K` written as floats; class 0 is the most
/// frequent.
pub fn sample_longtail_classification(spec: &MixtureSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let feature_bound = if spec.append_bias {
        (spec.input_bound * spec.input_bound - 1.0).sqrt()
    } else {
        spec.input_bound
    };
    let centers: Vec<Vec<f64>> = (0..spec.num_classes)
        .map(|_| {
            let c = (0..spec.dim)
                .map(|_| spec.center_scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            clip_to_ball(c, feature_bound)
        })
        .collect();
    let classes = WeightedIndex::new(spec.class_weights()).map_err(|e| Error::invalid("tail_exponent", e.to_string()))?;

    let mut inputs = Vec::with_capacity(n * spec.input_dim());
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let k = classes.sample(&mut rng);
        let x: Vec<f64> = centers[k]
            .iter()
            .map(|c| c + spec.noise_scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        inputs.extend(clip_to_ball(x, feature_bound));
        if spec.append_bias {
            inputs.push(1.0);
        }
        targets.push(k as f64);
    }
    Dataset::new(spec.input_dim(), inputs, targets)
}
