//! `marnet bounds <kind> [--key value]...`: bound evaluations as CSV.
//!
//! | kind            | columns |
//! |-----------------|---------|
//! | `estimation`, `logistic`, `hinge` | `theta,j,rademacher,complexity,confidence,value,probability` |
//! | `xent`          | `theta,j,lipschitz_factor,rademacher,complexity,confidence,value,probability` |
//! | `estimation-ml` | `hidden_layers,j_output,complexity,confidence,value,probability` |
//! | `approximation` | `theta,theta_prime,barron,separation,value` |
//! | `tradeoff`      | `theta,estimation,approximation,sum,valid,violation,argmin` |
//!
//! `--theta` takes a comma list and `--grid lo,hi,points` an evenly spaced
//! grid; each angle gives one row. Reals accept `pi`, `pi/k` and `k*pi`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use marnet_core::bounds::{
    self, ApproxBoundInputs, BoundReport, LayerBound, MultiLayerBoundInputs, SingleLayerBoundInputs,
};
use marnet_core::matrix::format_float;
use marnet_core::{Activation, ActivationKind};

use crate::sweep::into_string;
use crate::{parse_real, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Estimation,
    EstimationMl,
    Logistic,
    Hinge,
    Xent,
    Approximation,
    Tradeoff,
}

impl FromStr for BoundKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "estimation" => Self::Estimation,
            "estimation-ml" => Self::EstimationMl,
            "logistic" => Self::Logistic,
            "hinge" => Self::Hinge,
            "xent" => Self::Xent,
            "approximation" => Self::Approximation,
            "tradeoff" => Self::Tradeoff,
            _ => {
                return Err(CliError::Invalid(format!(
                    "unknown bound kind `{s}` (expected estimation, estimation-ml, logistic, hinge, xent, approximation or tradeoff)"
                )))
            }
        })
    }
}

const SINGLE_KEYS: &[&str] = &[
    "activation", "lipschitz", "h0", "c1", "c2", "c3", "c4", "m", "n", "delta", "tau", "theta", "grid",
];

impl BoundKind {
    fn allowed(self) -> Vec<&'static str> {
        let mut keys = SINGLE_KEYS.to_vec();
        match self {
            Self::Estimation | Self::Logistic | Self::Hinge => {}
            Self::Xent => keys.push("classes"),
            Self::Approximation => {
                keys = vec!["c", "c1", "c3", "c4", "m", "theta", "grid", "approx_index"];
            }
            Self::Tradeoff => keys.extend(["c", "approx_index"]),
            Self::EstimationMl => {
                keys = vec!["activation", "lipschitz", "h0", "c1", "c2", "n", "delta", "units", "theta", "c3", "tau"];
            }
        }
        keys
    }
}

/// `--key value` pairs.
#[derive(Debug, Clone, Default)]
pub struct BoundParams(BTreeMap<String, String>);

impl BoundParams {
    pub fn parse(args: &[String]) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| CliError::Invalid(format!("expected `--key value`, got `{flag}`")))?;
            let value = it
                .next()
                .ok_or_else(|| CliError::Invalid(format!("missing value for `--{key}`")))?;
            if map.insert(key.replace('-', "_"), value.clone()).is_some() {
                return Err(CliError::Invalid(format!("`--{key}` given twice")));
            }
        }
        Ok(Self(map))
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn real(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_real(v).ok_or_else(|| CliError::Invalid(format!("`{key}` is not a number: `{v}`"))),
        }
    }

    fn count(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Invalid(format!("`{key}` is not a non-negative integer: `{v}`"))),
        }
    }

    fn reals(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| parse_real(s).ok_or_else(|| CliError::Invalid(format!("`{key}` has a bad entry `{s}`"))))
                    .collect()
            })
            .transpose()
    }

    fn counts(&self, key: &str) -> CliResult<Option<Vec<usize>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| CliError::Invalid(format!("`{key}` has a bad entry `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn check_keys(&self, kind: BoundKind) -> CliResult<()> {
        let allowed = kind.allowed();
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Invalid(format!(
                "unknown parameter `--{k}` (accepted: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    /// `(L, h(0))` from `--activation`, overridden by `--lipschitz` / `--h0`.
    fn activation_constants(&self) -> CliResult<(f64, f64)> {
        let (l, h0) = match self.raw("activation") {
            None => (1.0, 0.0),
            Some(name) => {
                let kind: ActivationKind = name
                    .parse()
                    .map_err(|_| CliError::Invalid(format!("unknown activation `{name}`")))?;
                let a = Activation::new(kind);
                (a.lipschitz(), a.at_zero())
            }
        };
        Ok((self.real("lipschitz", l)?, self.real("h0", h0)?))
    }

    fn thetas(&self) -> CliResult<Vec<f64>> {
        if let Some(g) = self.raw("grid") {
            let parts: Vec<&str> = g.split(',').collect();
            let bad = || CliError::Invalid(format!("`grid` must be `lo,hi,points`, got `{g}`"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo = parse_real(parts[0]).ok_or_else(bad)?;
            let hi = parse_real(parts[1]).ok_or_else(bad)?;
            let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
            if self.raw("theta").is_some() {
                return Err(CliError::Invalid("give either `theta` or `grid`, not both".into()));
            }
            return Ok(bounds::linear_grid(lo, hi, points));
        }
        Ok(self.reals("theta")?.unwrap_or_else(|| vec![FRAC_PI_2]))
    }

    fn single(&self, theta: f64) -> CliResult<SingleLayerBoundInputs> {
        let (lipschitz, h0) = self.activation_constants()?;
        Ok(SingleLayerBoundInputs {
            lipschitz,
            h0,
            c1: self.real("c1", 1.0)?,
            c2: self.real("c2", 1.0)?,
            c3: self.real("c3", 1.0)?,
            c4: self.real("c4", 1.0)?,
            m: self.count("m", 4)?,
            n: self.count("n", 10_000)?,
            delta: self.real("delta", 0.05)?,
            theta,
            tau: self.real("tau", 0.9)?,
        })
    }

    fn approx(&self, theta: f64) -> CliResult<ApproxBoundInputs> {
        Ok(ApproxBoundInputs {
            c: self.real("c", 1.0)?,
            c1: self.real("c1", 1.0)?,
            c3: self.real("c3", 1.0)?,
            c4: self.real("c4", 1.0)?,
            m: self.count("m", 4)?,
            theta,
            approx_index: self.raw("approx_index").map(|_| self.count("approx_index", 0)).transpose()?,
        })
    }

    fn multilayer(&self) -> CliResult<MultiLayerBoundInputs> {
        let (lipschitz, h0) = self.activation_constants()?;
        let units = self
            .counts("units")?
            .ok_or_else(|| CliError::Invalid("`units` is required: hidden widths then the output width".into()))?;
        let layers = units.len();
        let thetas = self.reals("theta")?.unwrap_or_else(|| vec![FRAC_PI_2; layers]);
        let c3 = self.reals("c3")?.unwrap_or_else(|| vec![1.0; layers]);
        let tau = self.reals("tau")?.unwrap_or_else(|| vec![0.9; layers.saturating_sub(1)]);
        for (name, len) in [("theta", thetas.len()), ("c3", c3.len())] {
            if len != layers {
                return Err(CliError::Invalid(format!(
                    "`{name}` needs one entry per layer in `units` ({layers}), got {len}"
                )));
            }
        }
        Ok(MultiLayerBoundInputs {
            lipschitz,
            h0,
            c1: self.real("c1", 1.0)?,
            c2: self.real("c2", 1.0)?,
            n: self.count("n", 10_000)?,
            delta: self.real("delta", 0.05)?,
            layers: units
                .iter()
                .zip(&thetas)
                .zip(&c3)
                .map(|((&m, &theta), &c3)| LayerBound { m, theta, c3 })
                .collect(),
            tau,
        })
    }
}

pub fn header(kind: BoundKind) -> &'static [&'static str] {
    match kind {
        BoundKind::Estimation | BoundKind::Logistic | BoundKind::Hinge => {
            &["theta", "j", "rademacher", "complexity", "confidence", "value", "probability"]
        }
        BoundKind::Xent => &[
            "theta",
            "j",
            "lipschitz_factor",
            "rademacher",
            "complexity",
            "confidence",
            "value",
            "probability",
        ],
        BoundKind::EstimationMl => &["hidden_layers", "j_output", "complexity", "confidence", "value", "probability"],
        BoundKind::Approximation => &["theta", "theta_prime", "barron", "separation", "value"],
        BoundKind::Tradeoff => &["theta", "estimation", "approximation", "sum", "valid", "violation", "argmin"],
    }
}

fn term(r: &BoundReport, name: &str) -> f64 {
    r.term(name).unwrap_or(f64::NAN)
}

fn estimation_row(theta: f64, inp: &SingleLayerBoundInputs, r: &BoundReport) -> CliResult<Vec<f64>> {
    Ok(vec![
        theta,
        bounds::capacity_j(inp)?,
        bounds::rademacher_f_bound(inp)?,
        term(r, "complexity"),
        term(r, "confidence"),
        r.value,
        r.probability,
    ])
}

/// Evaluates `kind` and renders the CSV table.
pub fn bounds_csv(kind: BoundKind, params: &BoundParams) -> CliResult<String> {
    params.check_keys(kind)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(kind))?;
    let fmt = |row: Vec<f64>| row.into_iter().map(format_float).collect::<Vec<_>>();

    match kind {
        BoundKind::Estimation | BoundKind::Logistic | BoundKind::Hinge => {
            for theta in params.thetas()? {
                let inp = params.single(theta)?;
                let r = match kind {
                    BoundKind::Estimation => bounds::estimation_bound_squared(&inp)?,
                    BoundKind::Logistic => bounds::estimation_bound_logistic(&inp)?,
                    _ => bounds::estimation_bound_hinge(&inp)?,
                };
                w.write_record(fmt(estimation_row(theta, &inp, &r)?))?;
            }
        }
        BoundKind::Xent => {
            let classes = params.count("classes", 2)?;
            for theta in params.thetas()? {
                let inp = params.single(theta)?;
                let r = bounds::estimation_bound_xent(&inp, classes)?;
                let j = bounds::capacity_j(&inp)?;
                w.write_record(fmt(vec![
                    theta,
                    j,
                    bounds::xent_lipschitz(j, classes)?,
                    bounds::rademacher_f_bound(&inp)?,
                    term(&r, "complexity"),
                    term(&r, "confidence"),
                    r.value,
                    r.probability,
                ]))?;
            }
        }
        BoundKind::EstimationMl => {
            let inp = params.multilayer()?;
            let js = bounds::multilayer_j(&inp)?;
            let r = bounds::estimation_bound_multilayer(&inp)?;
            let mut row = vec![inp.hidden_count().to_string()];
            row.extend(fmt(vec![
                *js.last().unwrap_or(&f64::NAN),
                term(&r, "complexity"),
                term(&r, "confidence"),
                r.value,
                r.probability,
            ]));
            w.write_record(row)?;
        }
        BoundKind::Approximation => {
            for theta in params.thetas()? {
                let inp = params.approx(theta)?;
                let r = bounds::approximation_bound(&inp)?;
                w.write_record(fmt(vec![
                    theta,
                    bounds::perturbation_angle(inp.m, theta),
                    term(&r, "barron"),
                    term(&r, "separation"),
                    r.value,
                ]))?;
            }
        }
        BoundKind::Tradeoff => {
            let grid = params.thetas()?;
            let est = params.single(grid.first().copied().unwrap_or(FRAC_PI_2))?;
            let app = params.approx(est.theta)?;
            let table = bounds::tradeoff_curve(&est, &app, &grid)?;
            let best = format_float(table.argmin_theta());
            for row in &table.rows {
                w.write_record([
                    format_float(row.theta),
                    format_float(row.estimation),
                    format_float(row.approximation),
                    format_float(row.sum),
                    row.violation.is_none().to_string(),
                    row.violation.clone().unwrap_or_default(),
                    best.clone(),
                ])?;
            }
        }
    }
    into_string(w)
}
