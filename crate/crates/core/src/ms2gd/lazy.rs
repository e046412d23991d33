use crate::error::Result;
use crate::ms2gd::{check_start, trace_config, Checkpoint, Solution, SolverConfig};
use crate::problem::CompositeProblem;
use crate::prox::prox_tau;
use crate::sampling::{draw_inner_steps, rng_from_seed, sample_batch};
use crate::trace::{RunTrace, TraceRecorder, WorkCounter};

/// Sparse path with deferred proximal updates.
///
/// `last_touch[j]` is the inner step at which coordinate `j` was last
/// brought up to date. The stored `y[j]` then already contains that step's
/// sparse correction but not yet its `g_k`-plus-prox part, which is replayed
/// together with every later untouched step by [`prox_tau`].
///
/// Outside checkpoints the per-step cost is `O(Σ_{i∈A} ω_i)`.
pub fn solve_lazy(problem: &CompositeProblem, cfg: &SolverConfig, x0: &[f64]) -> Result<Solution> {
    solve_lazy_observed(problem, cfg, x0, &mut |_| {})
}

pub fn solve_lazy_observed(
    problem: &CompositeProblem,
    cfg: &SolverConfig,
    x0: &[f64],
    observer: &mut dyn FnMut(&Checkpoint<'_>),
) -> Result<Solution> {
    check_start(problem, cfg, x0)?;
    let n = problem.n();
    let d = problem.dim();
    let b = cfg.batch_size;
    let h = cfg.step_size;
    let reg = problem.reg();
    let features = problem.data().features();
    let inv_b = 1.0 / b as f64;

    let mut rng = rng_from_seed(cfg.seed);
    let mut work = WorkCounter::new(n);
    let mut rec = TraceRecorder::new(RunTrace::new("ms2gd", trace_config(cfg)));

    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut last_touch = vec![0usize; d];
    let mut scratch = vec![0.0; d];
    let mut coefficients = Vec::with_capacity(b);
    let mut inner_steps = Vec::with_capacity(cfg.epochs);

    let p0 = problem.objective(&x)?;
    rec.record(&work, p0);
    observer(&Checkpoint {
        epoch: 0,
        inner_step: 0,
        effective_passes: 0.0,
        objective: p0,
        iterate: &x,
    });

    for epoch in 1..=cfg.epochs {
        problem.full_gradient_into(&x, &mut g)?;
        work.full_pass();
        let t_k = draw_inner_steps(&mut rng, cfg.max_inner_steps);
        inner_steps.push(t_k);
        y.copy_from_slice(&x);
        last_touch.iter_mut().for_each(|c| *c = 0);

        for t in 0..t_k {
            let batch = sample_batch(&mut rng, n, b)?;

            for &i in &batch {
                for &j in features.row(i).indices {
                    let lag = t - last_touch[j];
                    if lag > 0 {
                        y[j] = prox_tau(&reg, h, y[j], g[j], lag as u64);
                        last_touch[j] = t;
                    }
                }
            }

            coefficients.clear();
            coefficients.extend(
                batch
                    .iter()
                    .map(|&i| (problem.row_derivative(i, &y) - problem.row_derivative(i, &x)) * inv_b),
            );
            for (&i, &c) in batch.iter().zip(&coefficients) {
                for (j, v) in features.row(i).iter() {
                    y[j] -= h * (c * v);
                }
            }
            work.add(2 * b as u64);

            let done = t + 1;
            if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < t_k && rec.would_record(&work) {
                flush_into(&reg, h, &y, &g, &last_touch, done, &mut scratch);
                let obj = problem.objective(&scratch)?;
                rec.record(&work, obj);
                observer(&Checkpoint {
                    epoch,
                    inner_step: done,
                    effective_passes: work.passes(),
                    objective: obj,
                    iterate: &scratch,
                });
            }
        }

        flush_into(&reg, h, &y, &g, &last_touch, t_k, &mut x);
        let obj = problem.objective(&x)?;
        if rec.record(&work, obj) {
            observer(&Checkpoint {
                epoch,
                inner_step: t_k,
                effective_passes: work.passes(),
                objective: obj,
                iterate: &x,
            });
        }
        if !obj.is_finite() {
            break;
        }
    }

    Ok(Solution {
        x,
        trace: rec.finish(),
        inner_steps,
    })
}

/// Brings every coordinate up to inner step `step` and writes the result to `out`.
fn flush_into(
    reg: &crate::problem::Regularizer,
    h: f64,
    y: &[f64],
    g: &[f64],
    last_touch: &[usize],
    step: usize,
    out: &mut [f64],
) {
    for j in 0..y.len() {
        out[j] = prox_tau(reg, h, y[j], g[j], (step - last_touch[j]) as u64);
    }
}
