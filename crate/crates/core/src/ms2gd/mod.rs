//! Mini-batch semi-stochastic gradient descent.
//!
//! Each epoch computes the full gradient `g_k = ∇F(x_k)`, draws
//! `t_k ~ U{1, …, m}` and runs `t_k` proximal steps along
//!
//! ```text
//! G = g_k + (1/b) Σ_{i∈A} (∇f_i(y) - ∇f_i(x_k))
//! y ← prox_{hR}(y - h G)
//! ```
//!
//! with `A` a uniformly random subset of size `b`. [`solve_dense`] applies
//! every step to all `d` coordinates. [`solve_lazy`] touches only the
//! supports of the sampled rows and replays the skipped `g_k` steps of a
//! coordinate in closed form when it is next read. Both consume the random
//! stream identically (`t_k` first, then one batch per inner step) and
//! therefore follow the same trajectory up to rounding.

mod dense;
mod lazy;
mod variance;

pub use dense::{solve_dense, solve_dense_observed};
pub use lazy::{solve_lazy, solve_lazy_observed};
pub use variance::{exact_estimate_mean, exact_estimate_variance, MAX_ENUMERATION_N};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::CompositeProblem;
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Mini-batch size `b`, `1 ≤ b ≤ n`.
    pub batch_size: usize,
    /// Maximum inner steps per epoch `m`.
    pub max_inner_steps: usize,
    /// Stepsize `h`.
    pub step_size: f64,
    /// Number of outer iterations `k`.
    pub epochs: usize,
    pub seed: u64,
    /// Use the sparse lazy-update path.
    pub lazy: bool,
    /// Record a checkpoint every this many inner steps. Zero records only
    /// at epoch boundaries.
    pub checkpoint_every: usize,
}

impl SolverConfig {
    pub fn new(batch_size: usize, max_inner_steps: usize, step_size: f64, epochs: usize) -> Self {
        Self {
            batch_size,
            max_inner_steps,
            step_size,
            epochs,
            seed: 0,
            lazy: true,
            checkpoint_every: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn with_checkpoint_every(mut self, every: usize) -> Self {
        self.checkpoint_every = every;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.batch_size == 0 || self.batch_size > n {
            return Err(Error::config(format!(
                "mini-batch size must satisfy 1 <= b <= n = {n}, got {}",
                self.batch_size
            )));
        }
        if self.max_inner_steps == 0 {
            return Err(Error::config("maximum inner steps m must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::config(format!(
                "stepsize must be positive, got {}",
                self.step_size
            )));
        }
        if self.epochs == 0 {
            return Err(Error::config("epoch count must be at least 1"));
        }
        Ok(())
    }
}

/// Snapshot handed to observers at every recorded trace row.
#[derive(Debug, Clone, Copy)]
pub struct Checkpoint<'a> {
    /// Outer iteration; 0 before the first epoch.
    pub epoch: usize,
    /// Inner steps completed within the epoch (`t_k` at epoch end).
    pub inner_step: usize,
    pub effective_passes: f64,
    pub objective: f64,
    /// Fully flushed iterate.
    pub iterate: &'a [f64],
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub trace: RunTrace,
    /// Drawn inner-loop lengths `t_0, …, t_{k-1}`.
    pub inner_steps: Vec<usize>,
}

/// Runs the path selected by `cfg.lazy`.
pub fn solve(problem: &CompositeProblem, cfg: &SolverConfig, x0: &[f64]) -> Result<Solution> {
    if cfg.lazy {
        solve_lazy(problem, cfg, x0)
    } else {
        solve_dense(problem, cfg, x0)
    }
}

pub(crate) fn check_start(problem: &CompositeProblem, cfg: &SolverConfig, x0: &[f64]) -> Result<()> {
    cfg.validate(problem.n())?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            actual: x0.len(),
        });
    }
    Ok(())
}

pub(crate) fn trace_config(cfg: &SolverConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}
