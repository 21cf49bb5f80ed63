//! Dense column-major matrix whose columns are components.
//!
//! A `ComponentMatrix` of shape `d x K` stores `K` vectors of length `d`
//! contiguously, so `column(j)` is a plain slice. Network layers use the
//! same type: layer `i` maps a `d`-vector to a `K`-vector via `Aᵀx`.

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Shortest round-trip text for `x`; integral values print without a fraction.
pub fn format_float(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ComponentMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row-major data (the order used by the checkpoint format).
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, data[r * cols + c]);
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<V: AsRef<[f64]>>(columns: &[V]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    actual: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.rows + row] = value;
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let size = self.rows.max(1);
        self.data.chunks_exact(size).take(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.columns().map(norm).collect()
    }

    pub fn max_column_norm(&self) -> f64 {
        self.column_norms().into_iter().fold(0.0, f64::max)
    }

    /// Fails with `ZeroVector` naming the first column of zero norm.
    pub fn check_nonzero_columns(&self) -> Result<()> {
        match self.columns().position(|c| norm(c) == 0.0) {
            Some(index) => Err(Error::ZeroVector { index }),
            None => Ok(()),
        }
    }

    /// `Aᵀx`: one output per column.
    pub fn transpose_mul(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: x.len(),
            });
        }
        Ok(self.columns().map(|c| dot(c, x)).collect())
    }

    /// `Av`: the combination of columns weighted by `v`.
    pub fn mul(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (c, &w) in self.columns().zip(v) {
            for (o, a) in out.iter_mut().zip(c) {
                *o += w * a;
            }
        }
        Ok(out)
    }

    /// Gram matrix `AᵀA` (K x K).
    pub fn gram(&self) -> ComponentMatrix {
        let mut g = Self::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let v = dot(self.column(i), self.column(j));
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        g
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &ComponentMatrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_and_column_major_agree() {
        let a = ComponentMatrix::from_row_major(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(a.column(0), &[1., 4.]);
        assert_eq!(a.column(2), &[3., 6.]);
        assert_eq!(a.get(1, 1), 5.0);
        assert_eq!(a.transpose_mul(&[1., 1.]).unwrap(), vec![5., 7., 9.]);
        assert_eq!(a.mul(&[1., 0., 1.]).unwrap(), vec![4., 10.]);
    }

    #[test]
    fn zero_column_is_reported() {
        let a = ComponentMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(a.check_nonzero_columns(), Err(Error::ZeroVector { index: 1 }));
    }

    #[test]
    fn ragged_columns_rejected() {
        let r = ComponentMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0]]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
