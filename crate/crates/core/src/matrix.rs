//! Dense sample-by-feature matrices.

use crate::error::{PasError, Result};

/// An `n × d` matrix of finite feature values, one sample per row.
///
/// Storage is row-major so that each sample is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major values, rejecting empty shapes and non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(PasError::EmptyFit);
        }
        if values.len() != rows * cols {
            return Err(PasError::dims(rows * cols, values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PasError::NonFinite);
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(PasError::EmptyFit)?;
        let cols = first.len();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(PasError::dims(cols, row.len()));
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), cols, values)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(PasError::Range(format!("row {i} of {}", self.rows)));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::from_row_major(indices.len(), self.cols, values)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if other.cols != self.cols {
            return Err(PasError::dims(self.cols, other.cols));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Self::from_row_major(self.rows + other.rows, self.cols, values)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_row_major(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
