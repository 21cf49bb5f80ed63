//! Numerical checks of the angle geometry behind the bounds: the full-angle
//! triangle inequality, the top eigenvalue of the unit-diagonal `cos θ`
//! matrix, the operator norm of a separated weight matrix, and an explicit
//! 2-D family of `θ`-separated vectors close to arbitrary targets.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::diversity::pairwise_angle;
use crate::error::{Error, Result};
use crate::matrix::{dot, norm, ComponentMatrix};

/// Slack used for every angle and norm comparison.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 100_000;

/// Signed angle `arccos(a·b / ‖a‖‖b‖)` in `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FullAngle(f64);

impl FullAngle {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn nonzero(v: &[f64], index: usize) -> Result<f64> {
    let n = norm(v);
    if n == 0.0 {
        Err(Error::ZeroVector { index })
    } else {
        Ok(n)
    }
}

pub fn full_angle(a: &[f64], b: &[f64]) -> Result<FullAngle> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let na = nonzero(a, 0)?;
    let nb = nonzero(b, 1)?;
    let c = (dot(a, b) / (na * nb)).clamp(-1.0, 1.0);
    Ok(FullAngle(c.acos()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleCheck {
    pub phi12: f64,
    pub phi23: f64,
    pub phi13: f64,
    pub holds: bool,
}

/// Checks `φ(u1,u3) ≤ φ(u1,u2) + φ(u2,u3)`.
pub fn triangle_check(u1: &[f64], u2: &[f64], u3: &[f64]) -> Result<TriangleCheck> {
    for (i, u) in [u1, u2, u3].into_iter().enumerate() {
        nonzero(u, i)?;
    }
    let phi12 = full_angle(u1, u2)?.value();
    let phi23 = full_angle(u2, u3)?.value();
    let phi13 = full_angle(u1, u3)?.value();
    Ok(TriangleCheck {
        phi12,
        phi23,
        phi13,
        holds: phi13 <= phi12 + phi23 + ANGLE_TOLERANCE,
    })
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
///
/// Stops once successive Rayleigh quotients differ by at most
/// `tol · max(1, λ)`. The start vector is deterministic but not aligned with
/// any coordinate or with the all-ones direction.
pub fn power_iteration(a: &ComponentMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.cols(),
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i + 1) as f64 * 0.618_033_988_7).sin()).collect();
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);
    let mut lambda = f64::NAN;
    for _ in 0..max_iter {
        let w = a.mul(&v)?;
        let next = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        if (next - lambda).abs() <= tol * next.abs().max(1.0) {
            return Ok(next);
        }
        lambda = next;
        v = w.into_iter().map(|x| x / wn).collect();
    }
    Err(Error::ConvergenceFailure { iterations: max_iter })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QEigenvalue {
    pub closed_form: f64,
    pub numeric: f64,
}

/// The `m x m` matrix with ones on the diagonal and `cos θ` elsewhere.
pub fn q_matrix(m: usize, theta: f64) -> ComponentMatrix {
    let c = theta.cos();
    let mut q = ComponentMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            q.set(i, j, if i == j { 1.0 } else { c });
        }
    }
    q
}

pub fn q_top_eigenvalue(m: usize, theta: f64) -> Result<QEigenvalue> {
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::invalid("theta", format!("must lie in [0, pi/2], got {theta}")));
    }
    Ok(QEigenvalue {
        closed_form: crate::bounds::q_eigenvalue(m, theta),
        numeric: power_iteration(&q_matrix(m, theta), POWER_TOLERANCE, POWER_MAX_ITERATIONS)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNormCheck {
    pub opnorm_sq: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares `‖W‖²_op` with `((m-1)cos θ + 1)·C₃²` for a matrix whose columns
/// have norm at most `C₃` and pairwise non-obtuse angles at least `θ`.
pub fn operator_norm_check(w: &ComponentMatrix, theta: f64, c3: f64) -> Result<OperatorNormCheck> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::invalid("theta", format!("must lie in [0, pi/2], got {theta}")));
    }
    w.check_nonzero_columns()?;
    for (j, n) in w.column_norms().into_iter().enumerate() {
        if n > c3 + ANGLE_TOLERANCE {
            return Err(Error::PreconditionViolated(format!(
                "column norm <= C3 (column {j} has norm {n}, C3 = {c3})"
            )));
        }
    }
    for i in 0..w.cols() {
        for j in i + 1..w.cols() {
            let rho = pairwise_angle(w.column(i), w.column(j))?;
            if rho < theta - ANGLE_TOLERANCE {
                return Err(Error::PreconditionViolated(format!(
                    "pairwise angle >= theta (columns {i},{j} at {rho}, theta = {theta})"
                )));
            }
        }
    }
    let opnorm_sq = power_iteration(&w.gram(), POWER_TOLERANCE, POWER_MAX_ITERATIONS)?;
    let bound = crate::bounds::q_eigenvalue(w.cols(), theta) * c3 * c3;
    Ok(OperatorNormCheck {
        opnorm_sq,
        bound,
        holds: opnorm_sq <= bound + ANGLE_TOLERANCE,
    })
}

/// Largest `m` for which a `θ`-separated family in the plane exists:
/// `2(⌊(π/2 - θ)/θ⌋ + 1)`.
pub fn separated_capacity(theta: f64) -> usize {
    if theta <= 0.0 {
        return usize::MAX;
    }
    if theta > FRAC_PI_2 {
        return 0;
    }
    2 * (half_count(theta) + 1)
}

/// `⌊(π/2 - θ)/θ⌋`, with slack so exact ratios such as `θ = π/6` are not
/// rounded down.
fn half_count(theta: f64) -> usize {
    ((FRAC_PI_2 - theta) / theta + ANGLE_TOLERANCE).floor().max(0.0) as usize
}

/// The reference directions `e_i = (sin θ_i, cos θ_i)` with
/// `θ_i = sgn(i)(θ/2 + (|i|-1)θ)` over `i ∈ {-(k+1)..-1, 1..k+1}`.
pub fn reference_directions(theta: f64) -> Vec<(i64, [f64; 2])> {
    let k = half_count(theta) as i64;
    (-(k + 1)..=k + 1)
        .filter(|&i| i != 0)
        .map(|i| {
            let t = (i.signum() as f64) * (theta / 2.0 + (i.unsigned_abs() as f64 - 1.0) * theta);
            (i, [t.sin(), t.cos()])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedFamily2D {
    pub vectors: Vec<[f64; 2]>,
    pub theta: f64,
    /// Index `i` of the reference direction used for each vector.
    pub assignment: Vec<i64>,
}

/// Replaces each target by a reference direction of the same norm, so the
/// results are pairwise `θ`-separated and each moves by at most
/// `min(3mθ, π)`.
///
/// Targets in the lower half-plane are negated first and the chosen direction
/// negated back. Each target, in order, takes the unused direction with the
/// smallest full angle; ties go to smaller `|i|`, then positive `i`.
pub fn construct_separated_2d(theta: f64, targets: &[[f64; 2]]) -> Result<SeparatedFamily2D> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::invalid("theta", format!("must lie in (0, pi/2), got {theta}")));
    }
    let capacity = separated_capacity(theta);
    if targets.len() > capacity {
        return Err(Error::CapacityExceeded {
            units: targets.len(),
            capacity,
        });
    }
    let dirs = reference_directions(theta);
    let mut used = vec![false; dirs.len()];
    let mut vectors = Vec::with_capacity(targets.len());
    let mut assignment = Vec::with_capacity(targets.len());
    for (j, t) in targets.iter().enumerate() {
        let len = nonzero(t, j)?;
        let flip = t[1] < 0.0;
        let upper = if flip { [-t[0], -t[1]] } else { *t };
        let mut best: Option<(usize, f64)> = None;
        for (slot, (i, e)) in dirs.iter().enumerate() {
            if used[slot] {
                continue;
            }
            let phi = full_angle(e, &upper)?.value();
            let better = match best {
                None => true,
                Some((b, bphi)) => {
                    let bi = dirs[b].0;
                    if (phi - bphi).abs() <= 1e-12 {
                        (i.abs(), -i.signum()) < (bi.abs(), -bi.signum())
                    } else {
                        phi < bphi
                    }
                }
            };
            if better {
                best = Some((slot, phi));
            }
        }
        // capacity equals the number of directions, so one is always free
        let (slot, _) = best.expect("unused reference direction");
        used[slot] = true;
        let (i, e) = dirs[slot];
        let s = if flip { -len } else { len };
        vectors.push([s * e[0], s * e[1]]);
        assignment.push(i);
    }
    Ok(SeparatedFamily2D {
        vectors,
        theta,
        assignment,
    })
}

/// `min(3mθ, π)`, the guaranteed displacement of [`construct_separated_2d`].
pub fn displacement_bound(m: usize, theta: f64) -> f64 {
    (3.0 * m as f64 * theta).min(PI)
}
