use crate::error::Result;
use crate::ms2gd::{check_start, trace_config, Checkpoint, Solution, SolverConfig};
use crate::problem::CompositeProblem;
use crate::prox::prox_scalar;
use crate::sampling::{draw_inner_steps, rng_from_seed, sample_batch};
use crate::trace::{RunTrace, TraceRecorder, WorkCounter};

/// Reference path: every inner step updates all `d` coordinates.
pub fn solve_dense(problem: &CompositeProblem, cfg: &SolverConfig, x0: &[f64]) -> Result<Solution> {
    solve_dense_observed(problem, cfg, x0, &mut |_| {})
}

pub fn solve_dense_observed(
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

    let mut rng = rng_from_seed(cfg.seed);
    let mut work = WorkCounter::new(n);
    let mut rec = TraceRecorder::new(RunTrace::new("ms2gd", trace_config(cfg)));

    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut direction = vec![0.0; d];
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

        for t in 0..t_k {
            let batch = sample_batch(&mut rng, n, b)?;
            direction.copy_from_slice(&g);
            problem.add_correction(&y, &x, &batch, &mut direction);
            for (yj, &gj) in y.iter_mut().zip(&direction) {
                *yj = prox_scalar(&reg, h, *yj - h * gj);
            }
            work.add(2 * b as u64);

            let done = t + 1;
            if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < t_k {
                let obj = problem.objective(&y)?;
                if rec.record(&work, obj) {
                    observer(&Checkpoint {
                        epoch,
                        inner_step: done,
                        effective_passes: work.passes(),
                        objective: obj,
                        iterate: &y,
                    });
                }
            }
        }

        std::mem::swap(&mut x, &mut y);
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
