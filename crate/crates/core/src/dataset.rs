//! In-memory labelled samples and their CSV form.
//!
//! The CSV form has header `x0,...,x{d-1},y` and one row per sample. Floats
//! are written in shortest round-trip form, so integral labels print as
//! integers (`3`, `-1`).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::format_float;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    /// `inputs` is row-major `n x dim`.
    pub fn new(dim: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid("dataset", "needs at least one sample"));
        }
        if dim == 0 {
            return Err(Error::invalid("dataset", "input dimension must be positive"));
        }
        if inputs.len() != dim * targets.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * targets.len(),
                actual: inputs.len(),
            });
        }
        if let Some(i) = inputs.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(
                "dataset",
                format!("non-finite input in sample {}", i / dim),
            ));
        }
        Ok(Self {
            dim,
            inputs,
            targets,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Self::new(dim, rows.concat(), targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn max_input_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| crate::matrix::norm(self.input(i)))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_target(&self) -> f64 {
        self.targets.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(self.input(i));
            targets.push(self.targets[i]);
        }
        Self::new(self.dim, inputs, targets)
    }

    /// Seeded shuffle followed by a `train_fraction` / rest split.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::invalid(
                "train_fraction",
                format!("must lie in (0, 1), got {train_fraction}"),
            ));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let cut = ((self.len() as f64) * train_fraction).round() as usize;
        if cut == 0 || cut == self.len() {
            return Err(Error::invalid("dataset", "too few samples to split"));
        }
        Ok((self.subset(&idx[..cut])?, self.subset(&idx[cut..])?))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.dim {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("y\n");
        for i in 0..self.len() {
            for x in self.input(i) {
                out.push_str(&format_float(*x));
                out.push(',');
            }
            out.push_str(&format_float(self.targets[i]));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Format {
            line: 1,
            message: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let dim = cols.len().saturating_sub(1);
        let expected: Vec<String> = (0..dim).map(|j| format!("x{j}")).chain(["y".into()]).collect();
        if dim == 0 || cols != expected {
            return Err(Error::Format {
                line: 1,
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::Format {
                    line: i + 1,
                    message: format!("expected {} fields, got {}", dim + 1, fields.len()),
                });
            }
            for (j, f) in fields.iter().enumerate() {
                let v: f64 = f.trim().parse().map_err(|_| Error::Format {
                    line: i + 1,
                    message: format!("bad number `{f}`"),
                })?;
                if j < dim {
                    inputs.push(v);
                } else {
                    targets.push(v);
                }
            }
        }
        Self::new(dim, inputs, targets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let d = Dataset::from_rows(
            &[vec![0.1, -2.5e-17], vec![1.0 / 3.0, 7.0]],
            vec![-1.0, 3.0],
        )
        .unwrap();
        let text = d.to_csv();
        assert!(text.starts_with("x0,x1,y\n"));
        assert!(text.contains(",-1\n") && text.contains(",3\n"));
        assert_eq!(Dataset::from_csv(&text).unwrap(), d);
    }

    #[test]
    fn csv_errors_name_line() {
        let err = Dataset::from_csv("x0,y\n1,2\n1,2,3\n").unwrap_err();
        assert_eq!(err, Error::Format { line: 3, message: "expected 2 fields, got 3".into() });
        assert!(matches!(Dataset::from_csv("a,b\n"), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn split_is_seeded_and_disjoint() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_rows(&rows, (0..10).map(|i| i as f64).collect()).unwrap();
        let (a, b) = d.split(0.7, 3).unwrap();
        let (a2, _) = d.split(0.7, 3).unwrap();
        assert_eq!((a.len(), b.len()), (7, 3));
        assert_eq!(a, a2);
        let mut all: Vec<f64> = a.targets().iter().chain(b.targets()).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(Dataset::new(2, vec![], vec![]).is_err());
        assert!(Dataset::new(1, vec![f64::NAN], vec![0.0]).is_err());
    }
}
