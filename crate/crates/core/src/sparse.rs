//! Row-compressed sparse storage for design matrices.
//!
//! Rows are examples `a_i`. Column indices are 0-based in memory; the
//! LIBSVM reader in [`crate::libsvm`] converts from the 1-based on-disk form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Loss;

/// Borrowed view of a single sparse row.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> Row<'a> {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Dot product with a dense vector, summed in stored index order.
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&j, &v) in self.indices.iter().zip(self.values) {
            acc += v * x[j];
        }
        acc
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every storage invariant.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMatrix(msg));
        if row_offsets.len() != n_rows + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            ));
        }
        if col_indices.len() != values.len() {
            return bad(format!(
                "{} column indices but {} values",
                col_indices.len(),
                values.len()
            ));
        }
        if row_offsets[0] != 0 || row_offsets[n_rows] != values.len() {
            return bad("row_offsets must start at 0 and end at nnz".into());
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return bad(format!("row_offsets decrease at row {i}"));
            }
            let cols = &col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("column indices of row {i} are not strictly increasing"));
            }
            if let Some(&last) = cols.last() {
                if last >= n_cols {
                    return bad(format!("column {last} of row {i} exceeds n_cols = {n_cols}"));
                }
            }
        }
        if let Some(pos) = values.iter().position(|&v| v == 0.0 || !v.is_finite()) {
            return bad(format!("stored value at position {pos} is zero or non-finite"));
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from per-row `(column, value)` lists. Entries equal to
    /// zero are dropped; columns must be strictly increasing within a row.
    pub fn from_rows<I, R>(n_cols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = (usize, f64)>,
    {
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            for (j, v) in row {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        let n_rows = row_offsets.len() - 1;
        Self::from_parts(n_rows, n_cols, row_offsets, col_indices, values)
    }

    /// Dense row-major input; zeros are not stored.
    pub fn from_dense(n_cols: usize, dense_rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(r) = dense_rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                actual: r.len(),
            });
        }
        Self::from_rows(
            n_cols,
            dense_rows
                .iter()
                .map(|r| r.iter().copied().enumerate().collect::<Vec<_>>()),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fraction of stored entries, `nnz / (n_rows * n_cols)`.
    pub fn density(&self) -> f64 {
        if self.n_rows == 0 || self.n_cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.n_rows as f64 * self.n_cols as f64)
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        Row {
            indices: &self.col_indices[lo..hi],
            values: &self.values[lo..hi],
        }
    }

    /// `a_i^T x` with bounds and dimension checks.
    pub fn row_dot(&self, i: usize, x: &[f64]) -> Result<f64> {
        if i >= self.n_rows {
            return Err(Error::RowOutOfRange {
                index: i,
                n_rows: self.n_rows,
            });
        }
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: x.len(),
            });
        }
        Ok(self.row(i).dot(x))
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    /// Copy of the selected rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&i) = rows.iter().find(|&&i| i >= self.n_rows) {
            return Err(Error::RowOutOfRange {
                index: i,
                n_rows: self.n_rows,
            });
        }
        Self::from_rows(self.n_cols, rows.iter().map(|&i| self.row(i).iter()))
    }

    /// Scales every nonempty row to unit Euclidean norm.
    pub fn normalize_rows(&mut self) {
        for i in 0..self.n_rows {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let norm = self.values[lo..hi].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                self.values[lo..hi].iter_mut().for_each(|v| *v /= norm);
            }
        }
    }
}

/// Example-label pairs `(a_i, b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: CsrMatrix,
    labels: Vec<f64>,
    name: String,
}

impl Dataset {
    pub fn new(features: CsrMatrix, labels: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if labels.len() != features.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: features.n_rows(),
                actual: labels.len(),
            });
        }
        if features.n_rows() == 0 {
            return Err(Error::NoRows);
        }
        Ok(Self {
            features,
            labels,
            name: name.into(),
        })
    }

    pub fn features(&self) -> &CsrMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.features.n_cols()
    }

    pub fn normalize_rows(&mut self) {
        self.features.normalize_rows();
    }

    /// First `count` rows (or all of them, if fewer).
    pub fn head(&self, count: usize) -> Result<Self> {
        let rows: Vec<usize> = (0..count.min(self.n_rows())).collect();
        self.subset(&rows)
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let features = self.features.select_rows(rows)?;
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        Self::new(features, labels, self.name.clone())
    }

    /// Checks the label domain required by classification losses.
    pub fn check_binary_labels(&self) -> Result<()> {
        match self.labels.iter().position(|&b| b != 1.0 && b != -1.0) {
            Some(row) => Err(Error::InvalidLabel {
                row,
                label: self.labels[row],
            }),
            None => Ok(()),
        }
    }
}

/// Per-row smoothness constants of `∇f_i` and their maximum.
///
/// Logistic: `‖a_i‖²/4`. Squared: `‖a_i‖²`.
pub fn lipschitz_constants(data: &Dataset, loss: Loss) -> (Vec<f64>, f64) {
    let factor = loss.curvature_bound();
    let per_row: Vec<f64> = data.features().rows().map(|r| factor * r.squared_norm()).collect();
    let max = per_row.iter().copied().fold(0.0, f64::max);
    (per_row, max)
}
