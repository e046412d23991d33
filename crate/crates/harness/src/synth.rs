//! Synthetic problem generators.
//!
//! - [`lasso_synthetic`]: banded Gaussian-profile least squares with a sparse
//!   ground truth, the stand-in for image deblurring.
//! - [`sparse_logistic`]: text-like binary classification data with
//!   Zipf-distributed feature frequencies and unit-norm rows.
//! - [`dense_logistic`]: small dense classification data with unit-norm rows.

use std::collections::BTreeSet;

use ms2gd::{CompositeProblem, CsrMatrix, Dataset, Loss, Regularizer};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Zipf};

use crate::error::{HarnessError, Result};

/// Shape of the rcv1 training set: rows, columns and stored entries per row.
pub const RCV1_SHAPE: (usize, usize, usize) = (20_242, 47_236, 74);

#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub problem: CompositeProblem,
    pub x_true: Vec<f64>,
}

/// `n × n` symmetric banded operator `A_ij = exp(-(i-j)²/(2w²))` for
/// `|i - j| ≤ band` with `w = max(band/2, 1/2)`, a ground truth with `⌈n/10⌉`
/// Gaussian nonzeros and `b = A x† + σ ξ`.
///
/// The objective is `(1/n) Σ ½(a_iᵀx - b_i)² + λ‖x‖₁`. The strong convexity
/// estimate is the smallest eigenvalue of `(1/n)AᵀA`, floored at `1e-12`
/// times the largest.
pub fn lasso_synthetic(n: usize, band: usize, sigma: f64, lambda: f64, seed: u64) -> Result<LassoInstance> {
    if n < 2 {
        return Err(HarnessError::validation(format!(
            "lasso size must be at least 2, got {n}"
        )));
    }
    if band >= n {
        return Err(HarnessError::validation(format!("band {band} must be below n = {n}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(HarnessError::validation(format!(
            "noise level must be nonnegative, got {sigma}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (band as f64 / 2.0).max(0.5);
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(band);
            let hi = (i + band).min(n - 1);
            (lo..=hi)
                .map(|j| {
                    let off = i.abs_diff(j) as f64;
                    (j, (-off * off / (2.0 * width * width)).exp())
                })
                .collect()
        })
        .collect();
    let features = CsrMatrix::from_rows(n, rows)?;

    let mut x_true = vec![0.0; n];
    for j in sample(&mut rng, n, n.div_ceil(10)) {
        let v: f64 = rng.sample(StandardNormal);
        x_true[j] = if v == 0.0 { 1.0 } else { v };
    }
    let labels: Vec<f64> = (0..n)
        .map(|i| {
            let noise: f64 = rng.sample(StandardNormal);
            features.row(i).dot(&x_true) + sigma * noise
        })
        .collect();

    let data = Dataset::new(features, labels, "lasso")?;
    let (lo, hi) = gram_extreme_eigenvalues(&data, 500);
    let mu = lo.max(1e-12 * hi);
    let problem = CompositeProblem::new(
        data,
        Loss::Squared,
        Regularizer::new(ms2gd::RegKind::L1, lambda)?,
        Some(mu),
    )?;
    Ok(LassoInstance { problem, x_true })
}

/// Power-iteration estimates of the smallest and largest eigenvalue of
/// `(1/n) AᵀA`.
pub fn gram_extreme_eigenvalues(data: &Dataset, iters: usize) -> (f64, f64) {
    let m = data.features();
    let d = m.n_cols();
    let n = m.n_rows() as f64;
    let apply = |v: &[f64], out: &mut Vec<f64>| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for row in m.rows() {
            let u = row.dot(v) / n;
            for (j, a) in row.iter() {
                out[j] += u * a;
            }
        }
    };
    let normalize = |v: &mut Vec<f64>| {
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            v.iter_mut().for_each(|x| *x /= nrm);
        }
        nrm
    };
    let start = |k: usize| {
        (0..d)
            .map(|j| 1.0 + ((j * 7 + k) % 13) as f64 / 13.0)
            .collect::<Vec<f64>>()
    };

    let mut v = start(0);
    normalize(&mut v);
    let mut w = vec![0.0; d];
    let mut hi = 0.0;
    for _ in 0..iters {
        apply(&v, &mut w);
        hi = normalize(&mut w);
        std::mem::swap(&mut v, &mut w);
    }

    let mut v = start(5);
    normalize(&mut v);
    let mut shifted = 0.0;
    for _ in 0..iters {
        apply(&v, &mut w);
        w.iter_mut().zip(&v).for_each(|(wj, vj)| *wj = hi * vj - *wj);
        shifted = normalize(&mut w);
        std::mem::swap(&mut v, &mut w);
    }
    ((hi - shifted).max(0.0), hi)
}

fn unit_rows_labelled(rows: Vec<Vec<(usize, f64)>>, d: usize, rng: &mut ChaCha8Rng, name: &str) -> Result<Dataset> {
    let mut features = CsrMatrix::from_rows(d, rows)?;
    features.normalize_rows();
    let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let margins: Vec<f64> = features.rows().map(|r| r.dot(&w)).collect();
    let spread = (margins.iter().map(|u| u * u).sum::<f64>() / margins.len() as f64)
        .sqrt()
        .max(1e-12);
    let mut labels: Vec<f64> = margins
        .iter()
        .map(|u| {
            let p = ms2gd::problem::sigmoid(4.0 * u / spread);
            if rng.random::<f64>() < p {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    if labels.iter().all(|&l| l == labels[0]) {
        labels[0] = -labels[0];
    }
    Dataset::new(features, labels, name).map_err(Into::into)
}

/// `n` unit-norm rows over `d` columns with `nnz_per_row` distinct entries
/// each; column frequencies follow a Zipf law with exponent 1, values are
/// uniform on `[0.1, 1]` before normalization. Labels are drawn from a
/// logistic model on a Gaussian weight vector.
pub fn sparse_logistic(n: usize, d: usize, nnz_per_row: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 || nnz_per_row == 0 || nnz_per_row > d {
        return Err(HarnessError::validation(format!(
            "sparse generator needs n, d >= 1 and 1 <= nnz_per_row <= d, got n={n} d={d} nnz={nnz_per_row}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(d as f64, 1.0).map_err(|e| HarnessError::validation(e.to_string()))?;
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut cols = BTreeSet::new();
        while cols.len() < nnz_per_row {
            cols.insert(zipf.sample(&mut rng) as usize - 1);
        }
        rows.push(cols.into_iter().map(|j| (j, rng.random_range(0.1..1.0))).collect());
    }
    unit_rows_labelled(rows, d, &mut rng, "sparse_logistic")
}

/// `n` dense Gaussian rows in `d` dimensions, scaled to unit norm.
pub fn dense_logistic(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(HarnessError::validation(format!(
            "dense generator needs n, d >= 1, got n={n} d={d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..d).map(|j| (j, rng.sample(StandardNormal))).collect())
        .collect();
    unit_rows_labelled(rows, d, &mut rng, "dense_logistic")
}
