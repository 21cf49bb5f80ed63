//! Pairwise non-obtuse angles between components and the mutual angular
//! regularizer (MAR).
//!
//! For components `a_i`, `a_j` the non-obtuse angle is
//! `θ_ij = arccos(|a_i·a_j| / (‖a_i‖‖a_j‖)) ∈ [0, π/2]`. The MAR score is the
//! mean of the angles over all `K(K-1)` ordered pairs minus `γ` times their
//! population variance. Each unordered pair appears twice among the ordered
//! pairs, so both statistics are computed over unordered pairs, which gives
//! the same mean and variance.
//!
//! `|cos|` is clamped to `1 - ε` before `arccos`; where the clamp is active the
//! angle is constant and its gradient is zero. At `cos = 0` the kink of `|c|`
//! takes subgradient 0.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, ComponentMatrix};

pub const DEFAULT_COSINE_CLAMP: f64 = 1e-7;

/// Knobs of the regularizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarConfig {
    /// Weight of the variance term.
    pub gamma: f64,
    /// `ε` in `|cos| ≤ 1 - ε`.
    pub cosine_clamp: f64,
}

impl Default for MarConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            cosine_clamp: DEFAULT_COSINE_CLAMP,
        }
    }
}

impl MarConfig {
    pub fn new(gamma: f64, cosine_clamp: f64) -> Result<Self> {
        let cfg = Self {
            gamma,
            cosine_clamp,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, DEFAULT_COSINE_CLAMP)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if !(self.cosine_clamp > 0.0 && self.cosine_clamp < 1e-3) {
            return Err(Error::invalid(
                "cosine_clamp",
                format!("must lie in (0, 1e-3), got {}", self.cosine_clamp),
            ));
        }
        Ok(())
    }
}

/// Empirical statistics of the pairwise angles of one component matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityStats {
    pub mean: f64,
    /// Population variance over the ordered pairs.
    pub variance: f64,
    pub min_angle: f64,
}

impl DiversityStats {
    pub fn chebyshev_theta(&self, query: ChebyshevQuery) -> Result<f64> {
        chebyshev_theta(self.mean, self.variance, query)
    }
}

/// Probability level `τ ∈ (0, 1)` at which the angle lower bound is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevQuery {
    tau: f64,
}

impl ChebyshevQuery {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau < 1.0 {
            Ok(Self { tau })
        } else {
            Err(Error::InvalidTau(tau))
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

fn clamped_abs_cos(a: &[f64], b: &[f64], na: f64, nb: f64, eps: f64) -> f64 {
    (dot(a, b).abs() / (na * nb)).clamp(0.0, 1.0 - eps)
}

/// Non-obtuse angle between `a` and `b` with an explicit cosine clamp.
pub fn pairwise_angle_with_clamp(a: &[f64], b: &[f64], cosine_clamp: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 {
        return Err(Error::ZeroVector { index: 0 });
    }
    if nb == 0.0 {
        return Err(Error::ZeroVector { index: 1 });
    }
    Ok(clamped_abs_cos(a, b, na, nb, cosine_clamp).acos())
}

/// Non-obtuse angle between `a` and `b`, in `[0, π/2]`.
pub fn pairwise_angle(a: &[f64], b: &[f64]) -> Result<f64> {
    pairwise_angle_with_clamp(a, b, DEFAULT_COSINE_CLAMP)
}

fn check_components(a: &ComponentMatrix) -> Result<Vec<f64>> {
    if a.cols() < 2 {
        return Err(Error::invalid(
            "components",
            format!("need at least 2 columns, got {}", a.cols()),
        ));
    }
    a.check_nonzero_columns()?;
    Ok(a.column_norms())
}

/// Angles of all unordered pairs `i < j`, row by row.
pub fn pair_angles(a: &ComponentMatrix, cosine_clamp: f64) -> Result<Vec<f64>> {
    let norms = check_components(a)?;
    let k = a.cols();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let c = clamped_abs_cos(a.column(i), a.column(j), norms[i], norms[j], cosine_clamp);
            out.push(c.acos());
        }
    }
    Ok(out)
}

fn stats_of(angles: &[f64]) -> DiversityStats {
    let n = angles.len() as f64;
    let mean = angles.iter().sum::<f64>() / n;
    let variance = angles.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    let min_angle = angles.iter().copied().fold(f64::INFINITY, f64::min);
    DiversityStats {
        mean,
        variance,
        min_angle,
    }
}

pub fn angle_stats_with_clamp(a: &ComponentMatrix, cosine_clamp: f64) -> Result<DiversityStats> {
    Ok(stats_of(&pair_angles(a, cosine_clamp)?))
}

/// Mean, population variance and minimum of the pairwise angles.
pub fn angle_stats(a: &ComponentMatrix) -> Result<DiversityStats> {
    angle_stats_with_clamp(a, DEFAULT_COSINE_CLAMP)
}

/// `Ω(A) = mean(θ) - γ·var(θ)`.
pub fn mar_value(a: &ComponentMatrix, cfg: &MarConfig) -> Result<f64> {
    let s = angle_stats_with_clamp(a, cfg.cosine_clamp)?;
    Ok(s.mean - cfg.gamma * s.variance)
}

/// Analytic gradient `∂Ω/∂A`, same shape as `A`.
pub fn mar_gradient(a: &ComponentMatrix, cfg: &MarConfig) -> Result<ComponentMatrix> {
    let norms = check_components(a)?;
    let k = a.cols();
    let angles = pair_angles(a, cfg.cosine_clamp)?;
    let mean = stats_of(&angles).mean;
    // dΩ/dθ_ij for one unordered pair, which stands for two ordered ones
    let scale = 2.0 / (k * (k - 1)) as f64;

    let mut grad = ComponentMatrix::zeros(a.rows(), k);
    let mut idx = 0;
    for i in 0..k {
        for j in i + 1..k {
            let theta = angles[idx];
            idx += 1;
            let (ai, aj) = (a.column(i), a.column(j));
            let (ni, nj) = (norms[i], norms[j]);
            let c = dot(ai, aj) / (ni * nj);
            if c == 0.0 || c.abs() >= 1.0 - cfg.cosine_clamp {
                continue;
            }
            let weight = scale * (1.0 - 2.0 * cfg.gamma * (theta - mean));
            // dθ/dc for θ = arccos|c|
            let dtheta_dc = -c.signum() / (1.0 - c * c).sqrt();
            let coef = weight * dtheta_dc;
            let inv = 1.0 / (ni * nj);
            let (ci, cj) = (c / (ni * ni), c / (nj * nj));
            for r in 0..a.rows() {
                let gi = coef * (aj[r] * inv - ci * ai[r]);
                let gj = coef * (ai[r] * inv - cj * aj[r]);
                grad.column_mut(i)[r] += gi;
                grad.column_mut(j)[r] += gj;
            }
        }
    }
    Ok(grad)
}

/// Lower bound `θ = μ - √(σ/(1-τ))` holding with probability at least `τ`,
/// where `σ` is the variance of the angle distribution. May be negative.
pub fn chebyshev_theta(mean: f64, variance: f64, query: ChebyshevQuery) -> Result<f64> {
    if !(variance >= 0.0) {
        return Err(Error::invalid("variance", format!("must be >= 0, got {variance}")));
    }
    Ok(mean - (variance / (1.0 - query.tau())).sqrt())
}

/// Chebyshev angle bound of the empirical angle distribution, clamped to `[0, π/2]`.
pub fn estimate_theta(a: &ComponentMatrix, query: ChebyshevQuery) -> Result<f64> {
    let s = angle_stats(a)?;
    Ok(s.chebyshev_theta(query)?.clamp(0.0, FRAC_PI_2))
}
