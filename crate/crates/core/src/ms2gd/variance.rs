//! Exact moments of the mini-batch estimator by enumerating every batch.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::problem::CompositeProblem;

/// Largest `n` accepted by the enumeration routines.
pub const MAX_ENUMERATION_N: usize = 16;

fn check_enumerable(problem: &CompositeProblem, b: usize) -> Result<()> {
    let n = problem.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::config(format!(
            "exact enumeration limited to n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    if b == 0 || b > n {
        return Err(Error::InvalidBatch(format!("batch size {b} not in [1, {n}]")));
    }
    Ok(())
}

/// Average of the estimate `G` over all `C(n, b)` batches.
pub fn exact_estimate_mean(
    problem: &CompositeProblem,
    y: &[f64],
    x_ref: &[f64],
    g_ref: &[f64],
    b: usize,
) -> Result<Vec<f64>> {
    check_enumerable(problem, b)?;
    let mut sum = vec![0.0; problem.dim()];
    let mut count = 0usize;
    for batch in (0..problem.n()).combinations(b) {
        let est = problem.stochastic_estimate(y, x_ref, g_ref, &batch)?;
        sum.iter_mut().zip(&est).for_each(|(s, e)| *s += e);
        count += 1;
    }
    sum.iter_mut().for_each(|s| *s /= count as f64);
    Ok(sum)
}

/// `E‖G - ∇F(y)‖²` over all `C(n, b)` batches.
pub fn exact_estimate_variance(
    problem: &CompositeProblem,
    y: &[f64],
    x_ref: &[f64],
    g_ref: &[f64],
    b: usize,
) -> Result<f64> {
    check_enumerable(problem, b)?;
    let grad_y = problem.full_gradient(y)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for batch in (0..problem.n()).combinations(b) {
        let est = problem.stochastic_estimate(y, x_ref, g_ref, &batch)?;
        total += est.iter().zip(&grad_y).map(|(e, g)| (e - g) * (e - g)).sum::<f64>();
        count += 1;
    }
    Ok(total / count as f64)
}
