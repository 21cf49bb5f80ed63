//! Per-sample losses and their gradients with respect to the network output.
//!
//! Targets are stored as `f64`: a real response for `Squared`, a `±1` label for
//! `Logistic` and `Hinge`, and a class index for `CrossEntropy`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Squared,
    Logistic,
    Hinge,
    CrossEntropy,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Squared => "squared",
            LossKind::Logistic => "logistic",
            LossKind::Hinge => "hinge",
            LossKind::CrossEntropy => "cross_entropy",
        }
    }

    pub fn is_classification(self) -> bool {
        !matches!(self, LossKind::Squared)
    }

    /// Checks that `target` is a legal label for this loss given `outputs` network outputs.
    pub fn check_target(self, outputs: usize, target: f64) -> Result<()> {
        match self {
            LossKind::Squared | LossKind::Logistic | LossKind::Hinge if outputs != 1 => {
                Err(Error::DimensionMismatch {
                    expected: 1,
                    actual: outputs,
                })
            }
            LossKind::Squared => {
                if target.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("target", format!("non-finite response {target}")))
                }
            }
            LossKind::Logistic | LossKind::Hinge => {
                if target == 1.0 || target == -1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLabel(target))
                }
            }
            LossKind::CrossEntropy => {
                if outputs < 2 {
                    return Err(Error::invalid("outputs", "cross-entropy needs at least 2 classes"));
                }
                if target >= 0.0 && target.fract() == 0.0 && (target as usize) < outputs {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "target",
                        format!("class {target} outside 0..{outputs}"),
                    ))
                }
            }
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "squared" => Ok(LossKind::Squared),
            "logistic" => Ok(LossKind::Logistic),
            "hinge" => Ok(LossKind::Hinge),
            "cross_entropy" | "xent" => Ok(LossKind::CrossEntropy),
            other => Err(Error::invalid("loss", format!("unknown kind `{other}`"))),
        }
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn loss(kind: LossKind, prediction: &[f64], target: f64) -> Result<f64> {
    kind.check_target(prediction.len(), target)?;
    Ok(match kind {
        LossKind::Squared => (prediction[0] - target).powi(2),
        LossKind::Logistic => softplus(-target * prediction[0]),
        LossKind::Hinge => (1.0 - target * prediction[0]).max(0.0),
        LossKind::CrossEntropy => log_sum_exp(prediction) - prediction[target as usize],
    })
}

/// `∂ℓ/∂f`. Hinge uses subgradient 0 at the margin.
pub fn loss_gradient(kind: LossKind, prediction: &[f64], target: f64) -> Result<Vec<f64>> {
    kind.check_target(prediction.len(), target)?;
    Ok(match kind {
        LossKind::Squared => vec![2.0 * (prediction[0] - target)],
        LossKind::Logistic => {
            let yf = target * prediction[0];
            vec![-target * super::activation::sigmoid(-yf)]
        }
        LossKind::Hinge => {
            if target * prediction[0] < 1.0 {
                vec![-target]
            } else {
                vec![0.0]
            }
        }
        LossKind::CrossEntropy => {
            let lse = log_sum_exp(prediction);
            let mut g: Vec<f64> = prediction.iter().map(|f| (f - lse).exp()).collect();
            g[target as usize] -= 1.0;
            g
        }
    })
}

/// Predicted label: `sign(f)` with `sign(0) = +1`, or the arg-max class with
/// ties going to the lowest index. `None` for regression.
pub fn predict_label(kind: LossKind, prediction: &[f64]) -> Option<f64> {
    match kind {
        LossKind::Squared => None,
        LossKind::Logistic | LossKind::Hinge => {
            Some(if prediction[0] >= 0.0 { 1.0 } else { -1.0 })
        }
        LossKind::CrossEntropy => {
            let mut best = 0;
            for (k, &v) in prediction.iter().enumerate() {
                if v > prediction[best] {
                    best = k;
                }
            }
            Some(best as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn loss_examples() {
        assert_eq!(loss(LossKind::Squared, &[1.0], 1.0).unwrap(), 0.0);
        assert_eq!(loss(LossKind::Hinge, &[0.0], 1.0).unwrap(), 1.0);
        let ce = loss(LossKind::CrossEntropy, &[0.0, 0.0], 0.0).unwrap();
        assert!((ce - LN_2).abs() < 1e-15);
        assert!((loss(LossKind::Logistic, &[0.0], -1.0).unwrap() - LN_2).abs() < 1e-15);
    }

    #[test]
    fn label_and_shape_errors() {
        assert_eq!(loss(LossKind::Hinge, &[0.3], 0.0), Err(Error::InvalidLabel(0.0)));
        assert_eq!(loss(LossKind::Logistic, &[0.3], 2.0), Err(Error::InvalidLabel(2.0)));
        assert!(matches!(
            loss(LossKind::Squared, &[0.3, 0.1], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(loss(LossKind::CrossEntropy, &[0.3, 0.1], 2.0).is_err());
        assert!(loss(LossKind::CrossEntropy, &[0.3, 0.1], 0.5).is_err());
    }

    #[test]
    fn logistic_is_stable_for_large_margins() {
        assert!(loss(LossKind::Logistic, &[800.0], -1.0).unwrap().is_finite());
        assert_eq!(loss(LossKind::Logistic, &[800.0], 1.0).unwrap(), 0.0);
        let ce = loss(LossKind::CrossEntropy, &[1000.0, -1000.0], 1.0).unwrap();
        assert!((ce - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn gradients_match_central_differences() {
        let h = 1e-6;
        let cases: &[(LossKind, Vec<f64>, f64)] = &[
            (LossKind::Squared, vec![0.3], -1.2),
            (LossKind::Logistic, vec![0.7], -1.0),
            (LossKind::Hinge, vec![0.2], 1.0),
            (LossKind::CrossEntropy, vec![0.1, -0.4, 1.3], 2.0),
        ];
        for (kind, f, y) in cases {
            let g = loss_gradient(*kind, f, *y).unwrap();
            for k in 0..f.len() {
                let mut p = f.clone();
                p[k] += h;
                let mut m = f.clone();
                m[k] -= h;
                let fd = (loss(*kind, &p, *y).unwrap() - loss(*kind, &m, *y).unwrap()) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-8, "{kind}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn labels_follow_tie_conventions() {
        assert_eq!(predict_label(LossKind::Logistic, &[0.0]), Some(1.0));
        assert_eq!(predict_label(LossKind::Hinge, &[-1e-9]), Some(-1.0));
        assert_eq!(predict_label(LossKind::CrossEntropy, &[0.5, 0.5, 0.1]), Some(0.0));
        assert_eq!(predict_label(LossKind::CrossEntropy, &[0.5, 0.7, 0.7]), Some(1.0));
        assert_eq!(predict_label(LossKind::Squared, &[0.5]), None);
    }
}
