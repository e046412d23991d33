//! Grid search over the stepsize under a work budget.

use ms2gd::{CompositeProblem, RunTrace};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{parallel_map, run_single};
use crate::spec::SolverSpec;

/// What a grid point is scored by; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneScore {
    /// Objective at the last row within the budget.
    ObjectiveAtBudget,
    /// Passes until `P - p_star <= target`, infinite if not reached within
    /// the budget.
    PassesToTarget { p_star: f64, target: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    /// Coefficient in the solver's own stepsize units.
    pub value: f64,
    pub h: f64,
    /// Seed average of the score, `None` if any seed diverged.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub label: String,
    pub best_value: f64,
    pub best_h: f64,
    pub best_score: f64,
    pub budget_passes: f64,
    pub scored_by: TuneScore,
    pub grid: Vec<GridPoint>,
}

/// Objective at the last recorded row within `budget` passes.
pub fn score_at_budget(trace: &RunTrace, budget: f64) -> Option<f64> {
    trace
        .rows
        .iter()
        .take_while(|r| r.effective_passes <= budget + 1e-9)
        .last()
        .map(|r| r.objective)
        .filter(|v| v.is_finite())
}

fn score_trace(trace: &RunTrace, budget: f64, by: TuneScore) -> Option<f64> {
    let at_budget = score_at_budget(trace, budget)?;
    match by {
        TuneScore::ObjectiveAtBudget => Some(at_budget),
        TuneScore::PassesToTarget { p_star, target } => Some(
            trace
                .rows
                .iter()
                .take_while(|r| r.effective_passes <= budget + 1e-9)
                .find(|r| r.objective - p_star <= target)
                .map_or(f64::INFINITY, |r| r.effective_passes),
        ),
    }
}

/// Tries every grid value (in the units of `solver.h`) for enough epochs to
/// spend `budget_passes`, scoring each by the seed-averaged objective at the
/// budget. Ties go to the smaller stepsize.
pub fn tune_stepsize(
    problem: &CompositeProblem,
    solver: &SolverSpec,
    grid: &[f64],
    budget_passes: f64,
    seeds: &[u64],
) -> Result<TuneResult> {
    tune_stepsize_by(
        problem,
        solver,
        grid,
        budget_passes,
        seeds,
        TuneScore::ObjectiveAtBudget,
    )
}

/// [`tune_stepsize`] with an explicit score.
pub fn tune_stepsize_by(
    problem: &CompositeProblem,
    solver: &SolverSpec,
    grid: &[f64],
    budget_passes: f64,
    seeds: &[u64],
    by: TuneScore,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(HarnessError::validation("empty stepsize grid"));
    }
    if !(budget_passes > 0.0 && budget_passes.is_finite()) {
        return Err(HarnessError::validation(format!(
            "budget must be positive, got {budget_passes}"
        )));
    }
    if seeds.is_empty() {
        return Err(HarnessError::validation("no seeds"));
    }
    let mut values = grid.to_vec();
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(HarnessError::validation("stepsize grid values must be positive"));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();

    let base = solver.resolve(problem.n(), problem.lipschitz())?;
    let epochs = (budget_passes / base.expected_passes_per_epoch(problem.n())).ceil() as usize + 1;
    let mut resolved = Vec::with_capacity(values.len());
    for &v in &values {
        let spec = SolverSpec {
            h: solver.h.with_value(v),
            epochs,
            ..solver.clone()
        };
        resolved.push(spec.resolve(problem.n(), problem.lipschitz())?);
    }
    let jobs: Vec<(usize, u64)> = (0..resolved.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let scores = parallel_map(&jobs, |&(i, seed)| {
        run_single(problem, &resolved[i], seed)
            .ok()
            .and_then(|t| score_trace(&t, budget_passes, by))
    });

    let mut points = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let per_seed = &scores[i * seeds.len()..(i + 1) * seeds.len()];
        let score = per_seed
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64);
        points.push(GridPoint {
            value: v,
            h: resolved[i].h,
            score,
        });
    }
    let mut best: Option<&GridPoint> = None;
    for p in &points {
        if let Some(s) = p.score {
            if best.is_none_or(|b| s < b.score.unwrap()) {
                best = Some(p);
            }
        }
    }
    let best = best.ok_or_else(|| HarnessError::Runtime("every stepsize in the grid diverged".into()))?;
    Ok(TuneResult {
        label: solver.label(),
        best_value: best.value,
        best_h: best.h,
        best_score: best.score.unwrap(),
        budget_passes,
        scored_by: by,
        grid: points.clone(),
    })
}
