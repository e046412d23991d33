//! Comparison solvers sharing the problem model and trace format:
//! proximal SGD (constant and decaying stepsize), ISTA/FISTA, proximal SAG
//! and S2GD.
//!
//! Work accounting: SGD and SAG cost one unit per step, FISTA and GD one
//! effective pass (`n` units) per iteration, S2GD as mS2GD with `b = 1`.
//!
//! The stochastic solvers keep a per-coordinate "last touched" step and
//! replay untouched steps with [`prox_tau`], so a step costs `O(ω_i)` plus
//! an `O(d)` flush at each recorded checkpoint.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ms2gd::{self, Solution, SolverConfig};
use crate::problem::{CompositeProblem, Regularizer};
use crate::prox::{prox_scalar, prox_tau};
use crate::sampling::{draw_index, rng_from_seed};
use crate::trace::{RunTrace, TraceRecorder, WorkCounter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineSolver {
    SgdConst,
    SgdDecay,
    Gd,
    Fista,
    Sag,
    S2gd,
}

impl BaselineSolver {
    pub const ALL: [BaselineSolver; 6] = [
        BaselineSolver::SgdConst,
        BaselineSolver::SgdDecay,
        BaselineSolver::Gd,
        BaselineSolver::Fista,
        BaselineSolver::Sag,
        BaselineSolver::S2gd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineSolver::SgdConst => "sgd_const",
            BaselineSolver::SgdDecay => "sgd_decay",
            BaselineSolver::Gd => "gd",
            BaselineSolver::Fista => "fista",
            BaselineSolver::Sag => "sag",
            BaselineSolver::S2gd => "s2gd",
        }
    }
}

impl FromStr for BaselineSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::config(format!("unknown baseline solver `{s}`")))
    }
}

impl fmt::Display for BaselineSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub solver: BaselineSolver,
    /// Initial (or constant) stepsize `h₀`.
    pub step_size: f64,
    /// Effective passes for SGD/SAG, iterations for GD/FISTA, outer epochs
    /// for S2GD.
    pub epochs: usize,
    pub seed: u64,
    /// Inner loop bound `m` for S2GD.
    pub max_inner_steps: usize,
    /// Extra trace rows per pass for SGD/SAG and the checkpoint spacing for
    /// S2GD (see [`SolverConfig::checkpoint_every`]).
    pub checkpoints_per_pass: usize,
    /// Adaptive momentum restart for FISTA.
    pub restart: bool,
    /// Stop FISTA/GD once the gradient-mapping norm drops to this value.
    pub tolerance: Option<f64>,
    /// Lazy path for S2GD.
    pub lazy: bool,
}

impl BaselineConfig {
    pub fn new(solver: BaselineSolver, step_size: f64, epochs: usize) -> Self {
        Self {
            solver,
            step_size,
            epochs,
            seed: 0,
            max_inner_steps: 1,
            checkpoints_per_pass: 0,
            restart: false,
            tolerance: None,
            lazy: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_inner_steps(mut self, m: usize) -> Self {
        self.max_inner_steps = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::config(format!(
                "initial stepsize must be positive, got {}",
                self.step_size
            )));
        }
        if self.epochs == 0 {
            return Err(Error::config("epoch count must be at least 1"));
        }
        if self.solver == BaselineSolver::S2gd && self.max_inner_steps == 0 {
            return Err(Error::config("s2gd requires max_inner_steps >= 1"));
        }
        Ok(())
    }

    /// The mS2GD configuration S2GD delegates to.
    pub fn s2gd_config(&self) -> SolverConfig {
        SolverConfig {
            batch_size: 1,
            max_inner_steps: self.max_inner_steps,
            step_size: self.step_size,
            epochs: self.epochs,
            seed: self.seed,
            lazy: self.lazy,
            checkpoint_every: self.checkpoints_per_pass,
        }
    }
}

/// Dispatches on `cfg.solver`.
pub fn solve_baseline(problem: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<Solution> {
    match cfg.solver {
        BaselineSolver::SgdConst | BaselineSolver::SgdDecay => solve_sgd(problem, cfg, x0),
        BaselineSolver::Gd | BaselineSolver::Fista => solve_fista(problem, cfg, x0),
        BaselineSolver::Sag => solve_sag(problem, cfg, x0),
        BaselineSolver::S2gd => solve_s2gd(problem, cfg, x0),
    }
}

fn check_start(problem: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<()> {
    cfg.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            actual: x0.len(),
        });
    }
    Ok(())
}

fn new_recorder(cfg: &BaselineConfig) -> TraceRecorder {
    let config = serde_json::to_value(cfg).expect("config serializes");
    TraceRecorder::new(RunTrace::new(cfg.solver.name(), config))
}

/// SGD stepsize at a given completed-pass count: `h₀` for the constant
/// schedule, `h₀/(pass+1)` for the decaying one.
pub fn sgd_stepsize(cfg: &BaselineConfig, completed_passes: usize) -> f64 {
    match cfg.solver {
        BaselineSolver::SgdDecay => cfg.step_size / (completed_passes as f64 + 1.0),
        _ => cfg.step_size,
    }
}

/// Rows recorded per pass and the step offsets at which they fall.
fn checkpoint_offsets(n: usize, per_pass: usize) -> Vec<usize> {
    let k = per_pass + 1;
    let mut offs: Vec<usize> = (1..k).map(|c| c * n / k).filter(|&s| s > 0 && s < n).collect();
    offs.dedup();
    offs
}

/// Deferred prox bookkeeping shared by the SGD and SAG implementations.
/// Stored values are fully updated through step `last[j]`.
struct LazyIterate {
    x: Vec<f64>,
    last: Vec<usize>,
}

impl LazyIterate {
    fn new(x0: &[f64]) -> Self {
        Self {
            x: x0.to_vec(),
            last: vec![0; x0.len()],
        }
    }

    #[inline]
    fn catch_up(&mut self, j: usize, step: usize, reg: &Regularizer, h: f64, g: f64) {
        let lag = step - self.last[j];
        if lag > 0 {
            self.x[j] = prox_tau(reg, h, self.x[j], g, lag as u64);
            self.last[j] = step;
        }
    }

    fn flush_into(&self, step: usize, reg: &Regularizer, h: f64, g: impl Fn(usize) -> f64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate().take(self.x.len()) {
            *o = prox_tau(reg, h, self.x[j], g(j), (step - self.last[j]) as u64);
        }
    }
}

/// Proximal SGD: `x ← prox_{hR}(x - h ∇f_i(x))`, `i` uniform.
pub fn solve_sgd(problem: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<Solution> {
    check_start(problem, cfg, x0)?;
    if !matches!(cfg.solver, BaselineSolver::SgdConst | BaselineSolver::SgdDecay) {
        return Err(Error::config(format!("solve_sgd cannot run `{}`", cfg.solver)));
    }
    let n = problem.n();
    let reg = problem.reg();
    let features = problem.data().features();
    let offsets = checkpoint_offsets(n, cfg.checkpoints_per_pass);

    let mut rng = rng_from_seed(cfg.seed);
    let mut work = WorkCounter::new(n);
    let mut rec = new_recorder(cfg);
    let mut it = LazyIterate::new(x0);
    let mut scratch = vec![0.0; problem.dim()];
    rec.record(&work, problem.objective(x0)?);

    'passes: for pass in 0..cfg.epochs {
        let h = sgd_stepsize(cfg, pass);
        let mut next_cp = offsets.iter().copied().peekable();
        it.last.iter_mut().for_each(|l| *l = 0);
        for step in 0..n {
            let i = draw_index(&mut rng, n);
            let row = features.row(i);
            for &j in row.indices {
                it.catch_up(j, step, &reg, h, 0.0);
            }
            let c = problem.row_derivative(i, &it.x);
            for (j, v) in row.iter() {
                it.x[j] = prox_scalar(&reg, h, it.x[j] - h * c * v);
                it.last[j] = step + 1;
            }
            work.add(1);
            if next_cp.peek() == Some(&(step + 1)) {
                next_cp.next();
                it.flush_into(step + 1, &reg, h, |_| 0.0, &mut scratch);
                let obj = problem.objective(&scratch)?;
                rec.record(&work, obj);
                if !obj.is_finite() {
                    break 'passes;
                }
            }
        }
        it.flush_into(n, &reg, h, |_| 0.0, &mut scratch);
        it.x.copy_from_slice(&scratch);
        let obj = problem.objective(&it.x)?;
        rec.record(&work, obj);
        if !obj.is_finite() {
            break;
        }
    }

    Ok(Solution {
        x: it.x,
        trace: rec.finish(),
        inner_steps: Vec::new(),
    })
}

/// FISTA momentum sequence `t₁ = 1`, `t_{s+1} = (1 + √(1 + 4t_s²))/2`.
pub fn fista_momentum(count: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(count);
    let mut cur = 1.0f64;
    for _ in 0..count {
        t.push(cur);
        cur = (1.0 + (1.0 + 4.0 * cur * cur).sqrt()) / 2.0;
    }
    t
}

/// FISTA with stepsize `cfg.step_size` (normally `1/L`); `Gd` runs the same
/// recursion with momentum disabled, i.e. ISTA.
///
/// With `cfg.tolerance` set, stops once `‖y - prox(y - h∇F(y))‖/h` falls
/// below it.
pub fn solve_fista(problem: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<Solution> {
    check_start(problem, cfg, x0)?;
    let momentum = match cfg.solver {
        BaselineSolver::Fista => true,
        BaselineSolver::Gd => false,
        other => return Err(Error::config(format!("solve_fista cannot run `{other}`"))),
    };
    let n = problem.n();
    let d = problem.dim();
    let h = cfg.step_size;
    let reg = problem.reg();

    let mut work = WorkCounter::new(n);
    let mut rec = new_recorder(cfg);
    let mut x_prev = x0.to_vec();
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    let mut grad = vec![0.0; d];
    let mut t = 1.0f64;
    rec.record(&work, problem.objective(x0)?);

    for _ in 0..cfg.epochs {
        problem.full_gradient_into(&y, &mut grad)?;
        work.full_pass();
        let mut mapping_sq = 0.0;
        for j in 0..d {
            x[j] = prox_scalar(&reg, h, y[j] - h * grad[j]);
            let diff = y[j] - x[j];
            mapping_sq += diff * diff;
        }
        let mapping_norm = mapping_sq.sqrt() / h;

        if momentum {
            let restart = cfg.restart && (0..d).map(|j| (y[j] - x[j]) * (x[j] - x_prev[j])).sum::<f64>() > 0.0;
            if restart {
                t = 1.0;
                y.copy_from_slice(&x);
            } else {
                let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
                let beta = (t - 1.0) / t_next;
                for j in 0..d {
                    y[j] = x[j] + beta * (x[j] - x_prev[j]);
                }
                t = t_next;
            }
        } else {
            y.copy_from_slice(&x);
        }
        x_prev.copy_from_slice(&x);

        let obj = problem.objective(&x)?;
        rec.record(&work, obj);
        if !obj.is_finite() {
            break;
        }
        if cfg.tolerance.is_some_and(|tol| mapping_norm <= tol) {
            break;
        }
    }

    Ok(Solution {
        x,
        trace: rec.finish(),
        inner_steps: Vec::new(),
    })
}

/// Table of stored scalar derivatives `φ'_i` and their running
/// `Σ_i φ'_i a_i`. The averaged direction is `sum / n`.
#[derive(Debug, Clone)]
pub struct SagTable {
    derivatives: Vec<f64>,
    sum: Vec<f64>,
}

impl SagTable {
    pub fn new(n: usize, d: usize) -> Self {
        Self {
            derivatives: vec![0.0; n],
            sum: vec![0.0; d],
        }
    }

    /// Replaces slot `i` with `φ'_i(a_iᵀx)`.
    pub fn refresh(&mut self, problem: &CompositeProblem, i: usize, x: &[f64]) {
        let c = problem.row_derivative(i, x);
        let delta = c - self.derivatives[i];
        self.derivatives[i] = c;
        for (j, v) in problem.data().features().row(i).iter() {
            self.sum[j] += delta * v;
        }
    }

    /// Averaged gradient `(1/n) Σ_i φ'_i a_i`.
    pub fn direction(&self) -> Vec<f64> {
        let n = self.derivatives.len() as f64;
        self.sum.iter().map(|s| s / n).collect()
    }
}

/// Proximal SAG with constant stepsize: refresh one random slot, then
/// `x ← prox_{hR}(x - h · average)`. The table starts at zero.
pub fn solve_sag(problem: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<Solution> {
    check_start(problem, cfg, x0)?;
    if cfg.solver != BaselineSolver::Sag {
        return Err(Error::config(format!("solve_sag cannot run `{}`", cfg.solver)));
    }
    let n = problem.n();
    let h = cfg.step_size;
    let reg = problem.reg();
    let features = problem.data().features();
    let inv_n = 1.0 / n as f64;
    let offsets = checkpoint_offsets(n, cfg.checkpoints_per_pass);

    let mut rng = rng_from_seed(cfg.seed);
    let mut work = WorkCounter::new(n);
    let mut rec = new_recorder(cfg);
    let mut table = SagTable::new(n, problem.dim());
    let mut it = LazyIterate::new(x0);
    let mut scratch = vec![0.0; problem.dim()];
    rec.record(&work, problem.objective(x0)?);

    'passes: for _ in 0..cfg.epochs {
        let mut next_cp = offsets.iter().copied().peekable();
        it.last.iter_mut().for_each(|l| *l = 0);
        for step in 0..n {
            let i = draw_index(&mut rng, n);
            let row = features.row(i);
            for &j in row.indices {
                it.catch_up(j, step, &reg, h, table.sum[j] * inv_n);
            }
            table.refresh(problem, i, &it.x);
            for &j in row.indices {
                it.x[j] = prox_scalar(&reg, h, it.x[j] - h * (table.sum[j] * inv_n));
                it.last[j] = step + 1;
            }
            work.add(1);
            if next_cp.peek() == Some(&(step + 1)) {
                next_cp.next();
                it.flush_into(step + 1, &reg, h, |j| table.sum[j] * inv_n, &mut scratch);
                let obj = problem.objective(&scratch)?;
                rec.record(&work, obj);
                if !obj.is_finite() {
                    break 'passes;
                }
            }
        }
        it.flush_into(n, &reg, h, |j| table.sum[j] * inv_n, &mut scratch);
        it.x.copy_from_slice(&scratch);
        let obj = problem.objective(&it.x)?;
        rec.record(&work, obj);
        if !obj.is_finite() {
            break;
        }
    }

    Ok(Solution {
        x: it.x,
        trace: rec.finish(),
        inner_steps: Vec::new(),
    })
}

/// S2GD is mS2GD with `b = 1`.
pub fn solve_s2gd(problem: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Result<Solution> {
    check_start(problem, cfg, x0)?;
    if cfg.solver != BaselineSolver::S2gd {
        return Err(Error::config(format!("solve_s2gd cannot run `{}`", cfg.solver)));
    }
    let mut sol = ms2gd::solve(problem, &cfg.s2gd_config(), x0)?;
    sol.trace.solver = "s2gd".into();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Loss;
    use crate::sparse::{CsrMatrix, Dataset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(n: usize, d: usize, density: f64, loss: Loss, reg: Regularizer, seed: u64) -> CompositeProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut row: Vec<f64> = (0..d)
                    .map(|_| {
                        if rng.random::<f64>() < density {
                            rng.random_range(-1.0..1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                row[rng.random_range(0..d)] = 0.5;
                row
            })
            .collect();
        let labels = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let data = Dataset::new(CsrMatrix::from_dense(d, &rows).unwrap(), labels, "rand").unwrap();
        let mu = if reg.kind == crate::problem::RegKind::L2 {
            None
        } else {
            Some(1e-2)
        };
        CompositeProblem::new(data, loss, reg, mu).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn solver_names_round_trip() {
        for s in BaselineSolver::ALL {
            assert_eq!(s.name().parse::<BaselineSolver>().unwrap(), s);
        }
        assert!("sgd".parse::<BaselineSolver>().is_err());
    }

    #[test]
    fn sgd_schedule_halves_at_pass_boundaries() {
        let cfg = BaselineConfig::new(BaselineSolver::SgdDecay, 0.8, 4);
        let steps: Vec<f64> = (0..4).map(|p| sgd_stepsize(&cfg, p)).collect();
        assert_eq!(steps, vec![0.8, 0.4, 0.8 / 3.0, 0.2]);
        let cfg = BaselineConfig::new(BaselineSolver::SgdConst, 0.8, 4);
        assert!((0..4).all(|p| sgd_stepsize(&cfg, p) == 0.8));
    }

    #[test]
    fn momentum_second_term_is_golden_ratio() {
        let t = fista_momentum(3);
        assert_eq!(t[0], 1.0);
        assert!((t[1] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_fista_step_is_a_gradient_step() {
        let p = random_problem(10, 4, 0.6, Loss::Squared, Regularizer::none(), 1);
        let x0 = vec![0.3, -0.2, 0.1, 0.5];
        let h = 1.0 / p.lipschitz();
        let sol = solve_fista(&p, &BaselineConfig::new(BaselineSolver::Fista, h, 1), &x0).unwrap();
        let g = p.full_gradient(&x0).unwrap();
        let expected: Vec<f64> = x0.iter().zip(&g).map(|(x, g)| x - h * g).collect();
        assert!(max_diff(&sol.x, &expected) < 1e-15);
    }

    #[test]
    fn gd_is_ista() {
        let p = random_problem(12, 5, 0.5, Loss::Logistic, Regularizer::l1(0.05), 2);
        let x0 = vec![0.0; 5];
        let h = 1.0 / p.lipschitz();
        let sol = solve_fista(&p, &BaselineConfig::new(BaselineSolver::Gd, h, 7), &x0).unwrap();
        let mut x = x0.clone();
        for _ in 0..7 {
            let g = p.full_gradient(&x).unwrap();
            x = x
                .iter()
                .zip(&g)
                .map(|(x, g)| prox_scalar(&p.reg(), h, x - h * g))
                .collect();
        }
        assert_eq!(sol.x, x);
        assert_eq!(sol.trace.rows.len(), 8);
        assert_eq!(sol.trace.final_passes(), 7.0);
    }

    #[test]
    fn fista_reaches_tolerance_on_strongly_convex_problem() {
        let p = random_problem(30, 6, 0.7, Loss::Logistic, Regularizer::l2(0.1), 3);
        let mut cfg = BaselineConfig::new(BaselineSolver::Fista, 1.0 / p.lipschitz(), 100_000);
        cfg.restart = true;
        cfg.tolerance = Some(1e-12);
        let sol = solve_fista(&p, &cfg, &[0.0; 6]).unwrap();
        assert!(sol.trace.rows.len() < 100_000);
        let g = p.full_gradient(&sol.x).unwrap();
        let grad_p: f64 = g
            .iter()
            .zip(&sol.x)
            .map(|(g, x)| (g + 0.1 * x).abs())
            .fold(0.0, f64::max);
        assert!(grad_p < 1e-11, "{grad_p}");
    }

    fn dense_sgd(p: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Vec<f64> {
        let mut rng = rng_from_seed(cfg.seed);
        let mut x = x0.to_vec();
        let reg = p.reg();
        for pass in 0..cfg.epochs {
            let h = sgd_stepsize(cfg, pass);
            for _ in 0..p.n() {
                let i = draw_index(&mut rng, p.n());
                let grad = p.component_gradient(i, &x).unwrap();
                for j in 0..x.len() {
                    x[j] = prox_scalar(&reg, h, x[j] - h * grad[j]);
                }
            }
        }
        x
    }

    #[test]
    fn lazy_sgd_matches_dense_recursion() {
        for (reg, solver) in [
            (Regularizer::l2(0.05), BaselineSolver::SgdConst),
            (Regularizer::l1(0.02), BaselineSolver::SgdDecay),
            (Regularizer::none(), BaselineSolver::SgdDecay),
        ] {
            let p = random_problem(40, 30, 0.1, Loss::Logistic, reg, 4);
            let mut cfg = BaselineConfig::new(solver, 0.5, 3).with_seed(9);
            cfg.checkpoints_per_pass = 3;
            let x0 = vec![0.1; 30];
            let sol = solve_sgd(&p, &cfg, &x0).unwrap();
            assert!(max_diff(&sol.x, &dense_sgd(&p, &cfg, &x0)) < 1e-12, "{reg:?}");
            assert_eq!(sol.trace.rows.len(), 1 + 3 * 4);
            assert_eq!(sol.trace.final_passes(), 3.0);
        }
    }

    fn dense_sag(p: &CompositeProblem, cfg: &BaselineConfig, x0: &[f64]) -> Vec<f64> {
        let n = p.n();
        let mut rng = rng_from_seed(cfg.seed);
        let mut x = x0.to_vec();
        let mut table = SagTable::new(n, x.len());
        let reg = p.reg();
        let h = cfg.step_size;
        for _ in 0..cfg.epochs * n {
            let i = draw_index(&mut rng, n);
            table.refresh(p, i, &x);
            let dir = table.direction();
            for j in 0..x.len() {
                x[j] = prox_scalar(&reg, h, x[j] - h * dir[j]);
            }
        }
        x
    }

    #[test]
    fn lazy_sag_matches_dense_recursion() {
        for reg in [Regularizer::l2(0.05), Regularizer::l1(0.01), Regularizer::none()] {
            let p = random_problem(40, 30, 0.1, Loss::Squared, reg, 5);
            let mut cfg = BaselineConfig::new(BaselineSolver::Sag, 0.3 / p.lipschitz(), 4).with_seed(3);
            cfg.checkpoints_per_pass = 2;
            let x0 = vec![0.0; 30];
            let sol = solve_sag(&p, &cfg, &x0).unwrap();
            assert!(max_diff(&sol.x, &dense_sag(&p, &cfg, &x0)) < 1e-12, "{reg:?}");
            assert_eq!(sol.trace.final_passes(), 4.0);
        }
    }

    #[test]
    fn full_table_average_is_full_gradient() {
        let p = random_problem(15, 8, 0.4, Loss::Logistic, Regularizer::l2(0.1), 6);
        let x: Vec<f64> = (0..8).map(|j| 0.1 * j as f64 - 0.3).collect();
        let mut table = SagTable::new(15, 8);
        for i in (0..15).rev() {
            table.refresh(&p, i, &x);
        }
        table.refresh(&p, 4, &x);
        assert!(max_diff(&table.direction(), &p.full_gradient(&x).unwrap()) < 1e-15);
    }

    #[test]
    fn s2gd_is_unit_batch_ms2gd() {
        let p = random_problem(30, 10, 0.3, Loss::Logistic, Regularizer::l2(0.05), 7);
        let cfg = BaselineConfig::new(BaselineSolver::S2gd, 0.2, 3)
            .with_seed(11)
            .with_inner_steps(25);
        let sol = solve_s2gd(&p, &cfg, &[0.0; 10]).unwrap();
        let reference = ms2gd::solve(&p, &SolverConfig::new(1, 25, 0.2, 3).with_seed(11), &[0.0; 10]).unwrap();
        assert_eq!(sol.x, reference.x);
        assert_eq!(sol.trace.solver, "s2gd");
        let objs: Vec<f64> = sol.trace.rows.iter().map(|r| r.objective).collect();
        let ref_objs: Vec<f64> = reference.trace.rows.iter().map(|r| r.objective).collect();
        assert_eq!(objs, ref_objs);
    }

    #[test]
    fn invalid_configs() {
        let p = random_problem(5, 3, 0.5, Loss::Squared, Regularizer::none(), 8);
        let x0 = vec![0.0; 3];
        assert!(solve_baseline(&p, &BaselineConfig::new(BaselineSolver::Sag, 0.0, 1), &x0).is_err());
        assert!(solve_baseline(&p, &BaselineConfig::new(BaselineSolver::Sag, 0.1, 0), &x0).is_err());
        assert!(solve_baseline(&p, &BaselineConfig::new(BaselineSolver::Gd, 0.1, 1), &[0.0]).is_err());
        assert!(solve_sag(&p, &BaselineConfig::new(BaselineSolver::Gd, 0.1, 1), &x0).is_err());
        let mut cfg = BaselineConfig::new(BaselineSolver::S2gd, 0.1, 1);
        cfg.max_inner_steps = 0;
        assert!(solve_baseline(&p, &cfg, &x0).is_err());
    }

    #[test]
    fn divergent_run_stops_early() {
        let p = random_problem(20, 5, 0.8, Loss::Squared, Regularizer::none(), 9);
        let cfg = BaselineConfig::new(BaselineSolver::Gd, 1e6, 500);
        let sol = solve_baseline(&p, &cfg, &[1.0; 5]).unwrap();
        assert!(sol.trace.rows.len() < 500);
        assert!(!sol.trace.final_objective().unwrap().is_finite());
    }
}
