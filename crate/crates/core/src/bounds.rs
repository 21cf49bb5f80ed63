//! Closed-form generalization bounds for networks whose hidden units are
//! pairwise separated by at least an angle `θ`.
//!
//! Every estimation bound has the shape
//!
//! ```text
//! (Lipschitz factor of the loss) · (Rademacher bound of the class)
//!     + (loss cap) · √(2 log(2/δ) / n)
//! ```
//!
//! and holds with probability at least `(1-δ)τ`. The capacity term `J`
//! bounds `sup |f(x)|²` and shrinks as `θ` grows, because the top eigenvalue of
//! the `m x m` matrix with unit diagonal and `cos θ` elsewhere is
//! `(m-1)cos θ + 1`.
//!
//! The approximation bound grows with `θ`; [`tradeoff_curve`] tabulates both.
//!
//! All evaluations are plain `f64`; each [`BoundReport`] carries its additive
//! terms so the arithmetic can be audited.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geometry::separated_capacity;

/// Named additive breakdown of a bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub value: f64,
    pub terms: Vec<(&'static str, f64)>,
    /// Confidence with which the bound holds (`(1-δ)τ` or its product form).
    pub probability: f64,
}

impl BoundReport {
    fn from_terms(terms: Vec<(&'static str, f64)>, probability: f64) -> Self {
        let value = terms.iter().map(|(_, v)| v).sum();
        Self {
            value,
            terms,
            probability,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")))
    }
}

fn angle(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, pi/2], got {v}")))
    }
}

fn positive_count(name: &'static str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be >= 1"))
    }
}

/// `(m-1)cos θ + 1`, the top eigenvalue of the unit-diagonal `cos θ` matrix.
pub fn q_eigenvalue(m: usize, theta: f64) -> f64 {
    (m as f64 - 1.0) * theta.cos() + 1.0
}

/// `√(2 log(2/δ) / n)`.
fn confidence_factor(n: usize, delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln() / n as f64).sqrt()
}

/// Constants of a one-hidden-layer network `f(x) = Σ α_j h(w_jᵀx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleLayerBoundInputs {
    /// Lipschitz constant `L` of the activation.
    pub lipschitz: f64,
    /// `h(0)`.
    pub h0: f64,
    /// `‖x‖₂ ≤ C₁`.
    pub c1: f64,
    /// `|y| ≤ C₂`.
    pub c2: f64,
    /// `‖w_j‖₂ ≤ C₃`.
    pub c3: f64,
    /// `‖α‖₂ ≤ C₄`.
    pub c4: f64,
    /// Hidden units.
    pub m: usize,
    /// Training samples.
    pub n: usize,
    pub delta: f64,
    pub theta: f64,
    pub tau: f64,
}

impl SingleLayerBoundInputs {
    pub fn validate(&self) -> Result<()> {
        nonneg("lipschitz", self.lipschitz)?;
        if !self.h0.is_finite() {
            return Err(Error::invalid("h0", "must be finite"));
        }
        nonneg("c1", self.c1)?;
        nonneg("c2", self.c2)?;
        nonneg("c3", self.c3)?;
        nonneg("c4", self.c4)?;
        positive_count("m", self.m)?;
        positive_count("n", self.n)?;
        open_unit("delta", self.delta)?;
        angle("theta", self.theta)?;
        open_unit("tau", self.tau)
    }

    fn lambda(&self) -> f64 {
        q_eigenvalue(self.m, self.theta)
    }
}

/// Capacity term `J ≥ sup_{x,f} f(x)²`.
pub fn capacity_j(inp: &SingleLayerBoundInputs) -> Result<f64> {
    inp.validate()?;
    let SingleLayerBoundInputs {
        lipschitz: l,
        h0,
        c1,
        c3,
        c4,
        m,
        ..
    } = *inp;
    let m = m as f64;
    let lam = inp.lambda();
    Ok(m * c4 * c4 * h0 * h0
        + l * l * c1 * c1 * c3 * c3 * c4 * c4 * lam
        + 2.0 * m.sqrt() * c1 * c3 * c4 * c4 * l * h0.abs() * lam.sqrt())
}

/// Upper bound `(2LC₁C₃C₄ + C₄|h(0)|)·√m/√n` on the Rademacher complexity of the class.
pub fn rademacher_f_bound(inp: &SingleLayerBoundInputs) -> Result<f64> {
    inp.validate()?;
    Ok(rademacher_unchecked(inp))
}

fn rademacher_unchecked(inp: &SingleLayerBoundInputs) -> f64 {
    (2.0 * inp.lipschitz * inp.c1 * inp.c3 * inp.c4 + inp.c4 * inp.h0.abs()) * (inp.m as f64).sqrt()
        / (inp.n as f64).sqrt()
}

/// Estimation error bound for the squared loss.
pub fn estimation_bound_squared(inp: &SingleLayerBoundInputs) -> Result<BoundReport> {
    let sj = capacity_j(inp)?.sqrt();
    let complexity = 8.0 * (sj + inp.c2) * rademacher_unchecked(inp);
    let confidence = (sj + inp.c2).powi(2) * confidence_factor(inp.n, inp.delta);
    Ok(BoundReport::from_terms(
        vec![("complexity", complexity), ("confidence", confidence)],
        (1.0 - inp.delta) * inp.tau,
    ))
}

/// Estimation error bound for the logistic loss `log(1 + exp(-yf))`.
pub fn estimation_bound_logistic(inp: &SingleLayerBoundInputs) -> Result<BoundReport> {
    let sj = capacity_j(inp)?.sqrt();
    let complexity = 4.0 / (1.0 + (-sj).exp()) * rademacher_unchecked(inp);
    // log(1 + e^x) = x + log(1 + e^{-x}) keeps large √J finite
    let cap = sj + (-sj).exp().ln_1p();
    let confidence = cap * confidence_factor(inp.n, inp.delta);
    Ok(BoundReport::from_terms(
        vec![("complexity", complexity), ("confidence", confidence)],
        (1.0 - inp.delta) * inp.tau,
    ))
}

/// Estimation error bound for the hinge loss `max(0, 1 - yf)`.
pub fn estimation_bound_hinge(inp: &SingleLayerBoundInputs) -> Result<BoundReport> {
    let sj = capacity_j(inp)?.sqrt();
    let complexity = 4.0 * rademacher_unchecked(inp);
    let confidence = (1.0 + sj) * confidence_factor(inp.n, inp.delta);
    Ok(BoundReport::from_terms(
        vec![("complexity", complexity), ("confidence", confidence)],
        (1.0 - inp.delta) * inp.tau,
    ))
}

/// Lipschitz constant `(K-1)/(K-1+exp(-2√J))` of the softmax cross-entropy
/// in the ℓ₁ norm of the logits.
pub fn xent_lipschitz(j: f64, classes: usize) -> Result<f64> {
    if classes < 2 {
        return Err(Error::invalid("classes", format!("must be >= 2, got {classes}")));
    }
    nonneg("j", j)?;
    let k1 = classes as f64 - 1.0;
    Ok(k1 / (k1 + (-2.0 * j.sqrt()).exp()))
}

/// Estimation error bound for `K`-class softmax cross-entropy.
///
/// Each of the `K` outputs is a one-hidden-layer network with `‖α_k‖₂ ≤ C₄`.
/// The per-output Rademacher bounds are summed, scaled by
/// [`xent_lipschitz`], and paired with the loss cap
/// `log(1 + (K-1)exp(2√J))`.
pub fn estimation_bound_xent(inp: &SingleLayerBoundInputs, classes: usize) -> Result<BoundReport> {
    let j = capacity_j(inp)?;
    let lip = xent_lipschitz(j, classes)?;
    let sj = j.sqrt();
    let k = classes as f64;
    let complexity = 4.0 * lip * k * rademacher_unchecked(inp);
    // log(1 + (K-1)e^{2√J}) evaluated as a + log(1 + e^{-a}) with a = log(K-1) + 2√J
    let a = (k - 1.0).ln() + 2.0 * sj;
    let cap = a + (-a).exp().ln_1p();
    let confidence = cap * confidence_factor(inp.n, inp.delta);
    Ok(BoundReport::from_terms(
        vec![("complexity", complexity), ("confidence", confidence)],
        (1.0 - inp.delta) * inp.tau,
    ))
}

/// One weight layer of a deep network: unit count `m^p`, separation `θ^p`
/// and column-norm bound `C₃^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerBound {
    pub m: usize,
    pub theta: f64,
    pub c3: f64,
}

/// Constants of a network with `P` hidden layers.
///
/// `layers` has `P + 1` entries: hidden layers `0..P` and the output layer at
/// index `P` (usually `m = 1`). `tau` has one probability per hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLayerBoundInputs {
    pub lipschitz: f64,
    pub h0: f64,
    pub c1: f64,
    pub c2: f64,
    pub n: usize,
    pub delta: f64,
    pub layers: Vec<LayerBound>,
    pub tau: Vec<f64>,
}

impl MultiLayerBoundInputs {
    /// Number of hidden layers `P`.
    pub fn hidden_count(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        nonneg("lipschitz", self.lipschitz)?;
        if !self.h0.is_finite() {
            return Err(Error::invalid("h0", "must be finite"));
        }
        nonneg("c1", self.c1)?;
        nonneg("c2", self.c2)?;
        positive_count("n", self.n)?;
        open_unit("delta", self.delta)?;
        if self.layers.len() < 2 {
            return Err(Error::invalid(
                "layers",
                "need at least one hidden layer plus the output layer",
            ));
        }
        if self.tau.len() != self.hidden_count() {
            return Err(Error::invalid(
                "tau",
                format!("expected {} entries (one per hidden layer), got {}", self.hidden_count(), self.tau.len()),
            ));
        }
        for layer in &self.layers {
            positive_count("m", layer.m)?;
            angle("theta", layer.theta)?;
            nonneg("c3", layer.c3)?;
        }
        self.tau.iter().try_for_each(|&t| open_unit("tau", t))
    }
}

/// Capacity recursion `J⁰ … J^P`.
pub fn multilayer_j(inp: &MultiLayerBoundInputs) -> Result<Vec<f64>> {
    inp.validate()?;
    let (l, h0) = (inp.lipschitz, inp.h0.abs());
    let first = &inp.layers[0];
    let mut js = vec![inp.c1 * inp.c1 * q_eigenvalue(first.m, first.theta)];
    for p in 1..inp.layers.len() {
        let layer = &inp.layers[p];
        let prev_units = inp.layers[p - 1].m as f64;
        let prev = js[p - 1];
        let scale = layer.c3 * layer.c3 * q_eigenvalue(layer.m, layer.theta);
        js.push(scale * (l * l * prev + 2.0 * l * h0 * prev_units.sqrt() * prev.sqrt() + prev_units * h0 * h0));
    }
    Ok(js)
}

/// Estimation error bound for the squared loss with `P` hidden layers.
///
/// Includes the `C₁C₃⁰ · Π_{p<P} √(m^p)C₃^p` leading product as written, even
/// though it does not reduce to the single-layer bound at `P = 1`.
pub fn estimation_bound_multilayer(inp: &MultiLayerBoundInputs) -> Result<BoundReport> {
    let js = multilayer_j(inp)?;
    let p_count = inp.hidden_count();
    let sj = js[p_count].sqrt();
    let two_l = 2.0 * inp.lipschitz;
    let sqrt_n = (inp.n as f64).sqrt();
    let width_norm = |p: usize| (inp.layers[p].m as f64).sqrt() * inp.layers[p].c3;

    let product: f64 = (0..p_count).map(width_norm).product();
    let leading = two_l.powi(p_count as i32) * inp.c1 * inp.layers[0].c3 / sqrt_n * product;
    let offset: f64 = (0..p_count)
        .map(|p| two_l.powi((p_count - 1 - p) as i32) * (p..p_count).map(width_norm).product::<f64>())
        .sum::<f64>()
        * inp.h0.abs()
        / sqrt_n;

    let complexity = 8.0 * (sj + inp.c2) * (leading + offset);
    let confidence = (sj + inp.c2).powi(2) * confidence_factor(inp.n, inp.delta);
    let probability = (1.0 - inp.delta) * inp.tau.iter().product::<f64>();
    Ok(BoundReport::from_terms(
        vec![("complexity", complexity), ("confidence", confidence)],
        probability,
    ))
}

/// Constants of the approximation bound for targets with Fourier first
/// moment at most `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxBoundInputs {
    /// Fourier first-moment bound `C` of the target class.
    pub c: f64,
    pub c1: f64,
    pub c3: f64,
    pub c4: f64,
    pub m: usize,
    pub theta: f64,
    /// Count under the `1/√·` of the first term; `None` means `m`.
    pub approx_index: Option<usize>,
}

impl ApproxBoundInputs {
    fn index(&self) -> usize {
        self.approx_index.unwrap_or(self.m)
    }

    /// The `θ`-independent hypotheses.
    fn check_constants(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::PreconditionViolated(format!("C > 0 (got C = {})", self.c)));
        }
        positive_count("m", self.m)?;
        positive_count("approx_index", self.index())?;
        let c13 = self.c1 * self.c3;
        if !(c13 >= 1.0) {
            return Err(Error::PreconditionViolated(format!("C1*C3 >= 1 (got {c13})")));
        }
        let need = 2.0 * (self.m as f64).sqrt() * self.c;
        if !(self.c4 >= need) {
            return Err(Error::PreconditionViolated(format!(
                "C4 >= 2*sqrt(m)*C (got C4 = {}, need {need})",
                self.c4
            )));
        }
        Ok(())
    }

    /// The hypotheses that depend on `θ`.
    fn check_theta(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < FRAC_PI_2) {
            return Err(Error::PreconditionViolated(format!(
                "0 < theta < pi/2 (got theta = {})",
                self.theta
            )));
        }
        let cap = separated_capacity(self.theta);
        if self.m > cap {
            return Err(Error::PreconditionViolated(format!(
                "m <= 2*(floor((pi/2 - theta)/theta) + 1) (got m = {}, bound {cap})",
                self.m
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_constants()?;
        self.check_theta()
    }
}

/// `θ' = min(3mθ, π)`.
pub fn perturbation_angle(m: usize, theta: f64) -> f64 {
    (3.0 * m as f64 * theta).min(PI)
}

fn approximation_unchecked(inp: &ApproxBoundInputs) -> BoundReport {
    let c13 = inp.c1 * inp.c3;
    let barron = 2.0 * inp.c * (1.0 / (inp.index() as f64).sqrt() + (1.0 + 2.0 * c13.ln()) / c13);
    let separation = 4.0 * inp.m as f64 * inp.c * c13 * (perturbation_angle(inp.m, inp.theta) / 2.0).sin();
    BoundReport::from_terms(vec![("barron", barron), ("separation", separation)], 1.0)
}

/// Bound on `‖g - f‖` in `L₂(P)` achievable by a `θ`-separated network.
pub fn approximation_bound(inp: &ApproxBoundInputs) -> Result<BoundReport> {
    inp.validate()?;
    Ok(approximation_unchecked(inp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffRow {
    pub theta: f64,
    pub estimation: f64,
    pub approximation: f64,
    pub sum: f64,
    /// `None` when every approximation hypothesis holds at this `θ`.
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffTable {
    pub rows: Vec<TradeoffRow>,
    /// Index into `rows` of the smallest `sum`, ties to the smaller `θ`.
    pub argmin: usize,
}

impl TradeoffTable {
    pub fn argmin_theta(&self) -> f64 {
        self.rows[self.argmin].theta
    }
}

/// Squared-loss estimation bound, approximation bound and their sum over a
/// grid of `θ`.
///
/// Rows where the `θ`-dependent approximation hypotheses fail are kept and
/// carry the violated inequality; the formula is still evaluated there.
/// Hypotheses that do not depend on `θ` are hard errors.
pub fn tradeoff_curve(
    est: &SingleLayerBoundInputs,
    app: &ApproxBoundInputs,
    theta_grid: &[f64],
) -> Result<TradeoffTable> {
    if theta_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    app.check_constants()?;
    let mut rows = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        angle("theta", theta)?;
        let estimation = estimation_bound_squared(&SingleLayerBoundInputs { theta, ..*est })?.value;
        let app_at = ApproxBoundInputs { theta, ..*app };
        let violation = app_at.check_theta().err().map(|e| match e {
            Error::PreconditionViolated(msg) => msg,
            other => other.to_string(),
        });
        let approximation = approximation_unchecked(&app_at).value;
        rows.push(TradeoffRow {
            theta,
            estimation,
            approximation,
            sum: estimation + approximation,
            violation,
        });
    }
    let mut argmin = 0;
    for (i, r) in rows.iter().enumerate() {
        let best = &rows[argmin];
        if r.sum < best.sum || (r.sum == best.sum && r.theta < best.theta) {
            argmin = i;
        }
    }
    Ok(TradeoffTable { rows, argmin })
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| {
                if i == points - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

    pub(crate) fn reference() -> SingleLayerBoundInputs {
        SingleLayerBoundInputs {
            lipschitz: 1.0,
            h0: 0.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            m: 4,
            n: 10_000,
            delta: 0.05,
            theta: FRAC_PI_2,
            tau: 0.9,
        }
    }

    #[test]
    fn capacity_orthogonal_and_parallel() {
        let r = SingleLayerBoundInputs { c2: 0.0, ..reference() };
        assert!((capacity_j(&r).unwrap() - 1.0).abs() < 1e-15);
        let par = SingleLayerBoundInputs { theta: 0.0, ..r };
        assert_eq!(capacity_j(&par).unwrap(), 4.0);
    }

    #[test]
    fn rademacher_examples() {
        assert!((rademacher_f_bound(&reference()).unwrap() - 0.04).abs() < 1e-15);
        let r = SingleLayerBoundInputs { h0: 0.5, c4: 2.0, m: 1, n: 1, ..reference() };
        assert_eq!(rademacher_f_bound(&r).unwrap(), 5.0);
        let bad = SingleLayerBoundInputs { m: 0, ..reference() };
        assert!(matches!(rademacher_f_bound(&bad), Err(Error::InvalidInput { name: "m", .. })));
    }

    #[test]
    fn invalid_inputs_name_the_field() {
        let cases: [(SingleLayerBoundInputs, &str); 5] = [
            (SingleLayerBoundInputs { delta: 1.5, ..reference() }, "delta"),
            (SingleLayerBoundInputs { tau: 0.0, ..reference() }, "tau"),
            (SingleLayerBoundInputs { theta: 2.0, ..reference() }, "theta"),
            (SingleLayerBoundInputs { c3: -1.0, ..reference() }, "c3"),
            (SingleLayerBoundInputs { n: 0, ..reference() }, "n"),
        ];
        for (inp, field) in cases {
            match estimation_bound_squared(&inp) {
                Err(Error::InvalidInput { name, .. }) => assert_eq!(name, field),
                other => panic!("{field}: {other:?}"),
            }
        }
    }

    #[test]
    fn squared_bound_scaling_in_n() {
        let a = estimation_bound_squared(&reference()).unwrap();
        let b = estimation_bound_squared(&SingleLayerBoundInputs { n: 40_000, ..reference() }).unwrap();
        for ((_, x), (_, y)) in a.terms.iter().zip(&b.terms) {
            assert!((y - x / 2.0).abs() <= 1e-15 * x.abs());
        }
        assert!((a.probability - 0.95 * 0.9).abs() < 1e-15);
    }

    #[test]
    fn squared_bound_prefers_diversity() {
        let lo = estimation_bound_squared(&SingleLayerBoundInputs { theta: 0.0, ..reference() }).unwrap();
        let hi = estimation_bound_squared(&reference()).unwrap();
        assert!(lo.value > hi.value);
    }

    #[test]
    fn logistic_and_hinge_structure() {
        let zero_j = SingleLayerBoundInputs { c4: 0.0, ..reference() };
        let lg = estimation_bound_logistic(&zero_j).unwrap();
        assert_eq!(lg.term("complexity"), Some(0.0));
        let conf = confidence_factor(10_000, 0.05);
        assert!((lg.term("confidence").unwrap() - 2f64.ln() * conf).abs() < 1e-15);

        let h = estimation_bound_hinge(&zero_j).unwrap();
        assert!((h.term("confidence").unwrap() - conf).abs() < 1e-15);

        let t1 = estimation_bound_hinge(&SingleLayerBoundInputs { theta: 0.1, ..reference() }).unwrap();
        let t2 = estimation_bound_hinge(&SingleLayerBoundInputs { theta: 1.3, ..reference() }).unwrap();
        assert_eq!(t1.term("complexity"), t2.term("complexity"));
    }

    #[test]
    fn logistic_lipschitz_factor_below_four() {
        for c4 in [0.0, 0.5, 1.0, 10.0, 1e3] {
            let r = SingleLayerBoundInputs { c4, ..reference() };
            let rad = rademacher_f_bound(&r).unwrap();
            if rad > 0.0 {
                let factor = estimation_bound_logistic(&r).unwrap().term("complexity").unwrap() / rad;
                assert!(factor < 4.0 + 1e-12);
            }
        }
    }

    #[test]
    fn xent_lipschitz_examples() {
        assert_eq!(xent_lipschitz(0.0, 2).unwrap(), 0.5);
        let mut last = 0.0;
        for k in 2..200 {
            let v = xent_lipschitz(0.7, k).unwrap();
            assert!(v > last && v < 1.0);
            last = v;
        }
        assert!(xent_lipschitz(1.0, 1).is_err());
        assert!(matches!(
            estimation_bound_xent(&reference(), 1),
            Err(Error::InvalidInput { name: "classes", .. })
        ));
    }

    #[test]
    fn xent_cap_matches_printed_form() {
        let r = SingleLayerBoundInputs { c4: 0.3, ..reference() };
        let j = capacity_j(&r).unwrap();
        let b = estimation_bound_xent(&r, 5).unwrap();
        let cap = (1.0 + 4.0 * (2.0 * j.sqrt()).exp()).ln();
        assert!((b.term("confidence").unwrap() - cap * confidence_factor(r.n, r.delta)).abs() < 1e-15);
    }

    fn ml_reference() -> MultiLayerBoundInputs {
        MultiLayerBoundInputs {
            lipschitz: 1.0,
            h0: 0.0,
            c1: 1.0,
            c2: 1.0,
            n: 10_000,
            delta: 0.05,
            layers: vec![
                LayerBound { m: 2, theta: FRAC_PI_2, c3: 1.0 },
                LayerBound { m: 3, theta: FRAC_PI_2, c3: 1.0 },
            ],
            tau: vec![0.9],
        }
    }

    #[test]
    fn multilayer_orthogonal_collapse() {
        let js = multilayer_j(&ml_reference()).unwrap();
        assert!((js[0] - 1.0).abs() < 1e-15 && (js[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multilayer_without_bias_value_is_a_product() {
        let inp = MultiLayerBoundInputs {
            lipschitz: 0.7,
            c1: 1.3,
            layers: vec![
                LayerBound { m: 4, theta: 0.4, c3: 1.1 },
                LayerBound { m: 3, theta: 0.9, c3: 0.6 },
                LayerBound { m: 1, theta: 0.2, c3: 2.0 },
            ],
            tau: vec![0.9, 0.8],
            ..ml_reference()
        };
        let js = multilayer_j(&inp).unwrap();
        for p in 1..3 {
            let l = inp.layers[p];
            let expected = l.c3 * l.c3 * q_eigenvalue(l.m, l.theta) * 0.49 * js[p - 1];
            assert!((js[p] - expected).abs() < 1e-14 * expected);
        }
        let b = estimation_bound_multilayer(&inp).unwrap();
        assert!((b.probability - 0.95 * 0.72).abs() < 1e-15);
    }

    #[test]
    fn multilayer_h0_zero_closed_form() {
        for (l, c1, c3) in [(1.0, 1.0, 1.0), (0.25, 2.0, 0.5), (3.0, 0.7, 1.9)] {
            let inp = MultiLayerBoundInputs {
                lipschitz: l,
                c1,
                layers: vec![
                    LayerBound { m: 5, theta: FRAC_PI_2, c3: 1.7 },
                    LayerBound { m: 1, theta: FRAC_PI_2, c3 },
                ],
                ..ml_reference()
            };
            let js = multilayer_j(&inp).unwrap();
            assert!((js[1] - c3 * c3 * l * l * c1 * c1).abs() < 1e-12);
        }
    }

    #[test]
    fn multilayer_one_hidden_layer_bracket() {
        // P = 1: bracket is (2L C1 C3⁰ √m⁰ C3⁰ + |h0| √m⁰ C3⁰)/√n, which is the
        // single-layer Rademacher bound with C3 = C4 = C3⁰
        let inp = MultiLayerBoundInputs {
            lipschitz: 0.25,
            h0: 0.5,
            c1: 1.5,
            layers: vec![
                LayerBound { m: 6, theta: 0.8, c3: 1.4 },
                LayerBound { m: 1, theta: FRAC_PI_2, c3: 2.0 },
            ],
            ..ml_reference()
        };
        let js = multilayer_j(&inp).unwrap();
        let b = estimation_bound_multilayer(&inp).unwrap();
        let bracket = b.term("complexity").unwrap() / (8.0 * (js[1].sqrt() + inp.c2));
        let single = SingleLayerBoundInputs {
            lipschitz: 0.25,
            h0: 0.5,
            c1: 1.5,
            c2: 1.0,
            c3: 1.4,
            c4: 1.4,
            m: 6,
            n: 10_000,
            delta: 0.05,
            theta: 0.8,
            tau: 0.9,
        };
        assert!((bracket - rademacher_f_bound(&single).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn multilayer_h0_zero_drops_offset_and_scales_in_n() {
        let inp = ml_reference();
        let b = estimation_bound_multilayer(&inp).unwrap();
        // with h0 = 0 the bracket is exactly (2L)^P C1 C3⁰ Π √m^p C3^p / √n
        let js = multilayer_j(&inp).unwrap();
        let bracket = 2.0 * 1.0 * 1.0 * 2f64.sqrt() / 100.0;
        assert!((b.term("complexity").unwrap() - 8.0 * (js[1].sqrt() + 1.0) * bracket).abs() < 1e-15);

        let doubled = estimation_bound_multilayer(&MultiLayerBoundInputs { n: 20_000, ..inp }).unwrap();
        for ((_, x), (_, y)) in b.terms.iter().zip(&doubled.terms) {
            assert!((x / y - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn multilayer_validation() {
        let mut bad = ml_reference();
        bad.tau = vec![];
        assert!(matches!(multilayer_j(&bad), Err(Error::InvalidInput { name: "tau", .. })));
        bad = ml_reference();
        bad.layers.truncate(1);
        assert!(matches!(multilayer_j(&bad), Err(Error::InvalidInput { name: "layers", .. })));
    }

    #[test]
    fn multilayer_decreasing_in_theta() {
        let mut prev = f64::INFINITY;
        for t in linear_grid(0.0, FRAC_PI_2, 40) {
            let mut inp = ml_reference();
            inp.h0 = 0.5;
            inp.lipschitz = 0.25;
            inp.layers = vec![
                LayerBound { m: 5, theta: t, c3: 1.0 },
                LayerBound { m: 4, theta: t, c3: 1.0 },
                LayerBound { m: 1, theta: t, c3: 1.0 },
            ];
            inp.tau = vec![0.9, 0.9];
            let v = estimation_bound_multilayer(&inp).unwrap().value;
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    fn app_ref() -> ApproxBoundInputs {
        ApproxBoundInputs { c: 1.0, c1: 1.0, c3: 1.0, c4: 4.0, m: 4, theta: PI / 12.0, approx_index: None }
    }

    #[test]
    fn approximation_saturated_example() {
        let b = approximation_bound(&app_ref()).unwrap();
        assert!((b.value - 19.0).abs() < 1e-12);
        assert!((b.term("separation").unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn approximation_saturates_and_vanishes() {
        let sat = |t: f64| approximation_bound(&ApproxBoundInputs { theta: t, ..app_ref() }).unwrap();
        let start = PI / 12.0;
        for t in [start, start + 0.01, start + 0.1] {
            assert!((sat(t).term("separation").unwrap() - 16.0).abs() < 1e-12);
        }
        let tiny = sat(1e-9).term("separation").unwrap();
        assert!(tiny < 1e-6);
    }

    #[test]
    fn approximation_preconditions() {
        let cases = [
            ApproxBoundInputs { c1: 0.5, ..app_ref() },
            ApproxBoundInputs { c4: 3.9, ..app_ref() },
            ApproxBoundInputs { theta: 1.0, ..app_ref() },
            ApproxBoundInputs { theta: 0.0, ..app_ref() },
            ApproxBoundInputs { c: 0.0, ..app_ref() },
        ];
        let needles = ["C1*C3", "C4 >=", "m <=", "0 < theta", "C > 0"];
        for (inp, needle) in cases.iter().zip(needles) {
            match approximation_bound(inp) {
                Err(Error::PreconditionViolated(msg)) => assert!(msg.contains(needle), "{msg}"),
                other => panic!("{needle}: {other:?}"),
            }
        }
    }

    #[test]
    fn tradeoff_singleton_and_empty() {
        let est = SingleLayerBoundInputs { lipschitz: 0.25, h0: 0.5, c4: 4.0, ..reference() };
        let t = tradeoff_curve(&est, &app_ref(), &[FRAC_PI_2]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.argmin_theta(), FRAC_PI_2);
        assert!(t.rows[0].violation.is_some());
        assert_eq!(tradeoff_curve(&est, &app_ref(), &[]), Err(Error::EmptyGrid));
    }

    #[test]
    fn tradeoff_columns_are_monotone() {
        let est = SingleLayerBoundInputs { lipschitz: 0.25, h0: 0.5, c4: 4.0, ..reference() };
        let grid = linear_grid(0.01, FRAC_PI_2, 50);
        let t = tradeoff_curve(&est, &app_ref(), &grid).unwrap();
        for w in t.rows.windows(2) {
            assert!(w[1].estimation <= w[0].estimation);
            assert!(w[1].approximation >= w[0].approximation);
        }
        // capacity for m = 4 ends at θ = π/4; rows past it are flagged
        for r in &t.rows {
            assert_eq!(r.violation.is_none(), r.theta <= PI / 4.0 + 1e-12, "theta {}", r.theta);
        }
    }

    #[test]
    fn tradeoff_reference_argmin() {
        // m = 4, n = 10⁴: the approximation slope at θ → 0 (∝ 3m) beats the
        // flat estimation slope (∝ sin θ), so the minimum sits on the first grid point
        let m = 4;
        let est = SingleLayerBoundInputs { lipschitz: 0.25, h0: 0.5, c4: 2.0 * (m as f64).sqrt(), ..reference() };
        let grid = linear_grid(0.01, FRAC_PI_2, 50);
        let t = tradeoff_curve(&est, &app_ref(), &grid).unwrap();
        assert_eq!(t.argmin, 0);
        assert!((t.argmin_theta() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn tradeoff_scarce_samples_push_minimum_to_wide_angles() {
        // past π/(3m) the approximation term is flat while estimation keeps
        // falling, so with one sample the minimum is the widest grid angle
        let est = SingleLayerBoundInputs { lipschitz: 0.25, h0: 0.5, c4: 4.0, n: 1, ..reference() };
        let grid = linear_grid(0.01, FRAC_PI_2, 50);
        let t = tradeoff_curve(&est, &app_ref(), &grid).unwrap();
        assert_eq!(t.argmin, grid.len() - 1);
        assert!(t.rows[t.argmin].violation.is_some());
    }

    #[test]
    fn report_value_is_sum_of_terms() {
        let reports = [
            estimation_bound_squared(&reference()).unwrap(),
            estimation_bound_logistic(&reference()).unwrap(),
            estimation_bound_hinge(&reference()).unwrap(),
            estimation_bound_xent(&reference(), 7).unwrap(),
            approximation_bound(&app_ref()).unwrap(),
        ];
        for r in reports {
            let s: f64 = r.terms.iter().map(|(_, v)| v).sum();
            assert!((r.value - s).abs() <= 1e-12 * s.abs());
            assert!(r.value >= 0.0);
        }
        let _ = FRAC_PI_3 + FRAC_PI_6;
    }
}
