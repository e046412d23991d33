//! Objective traces indexed by effective passes over the data.
//!
//! One unit of work is one component gradient `∇f_i`; an effective pass is
//! `n` units. Work is counted in integer units so pass counts are exact.

use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub effective_passes: f64,
    pub objective: f64,
    pub suboptimality: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub solver: String,
    /// Full parameter record of the run, seed included.
    pub config: serde_json::Value,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn new(solver: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            solver: solver.into(),
            config,
            rows: Vec::new(),
        }
    }

    /// Fills the suboptimality column with `objective - p_star`.
    pub fn annotate(&mut self, p_star: f64) {
        for row in &mut self.rows {
            row.suboptimality = Some(row.objective - p_star);
        }
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.objective)
    }

    pub fn final_passes(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.effective_passes)
    }

    /// Passes at the first row whose suboptimality is at most `target`.
    pub fn passes_to_reach(&self, target: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.suboptimality.is_some_and(|s| s <= target))
            .map(|r| r.effective_passes)
    }
}

/// Integer work counter.
#[derive(Debug, Clone, Copy)]
pub struct WorkCounter {
    n: u64,
    units: u64,
}

impl WorkCounter {
    pub fn new(n: usize) -> Self {
        Self { n: n as u64, units: 0 }
    }

    pub fn add(&mut self, units: u64) {
        self.units += units;
    }

    pub fn full_pass(&mut self) {
        self.units += self.n;
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    pub fn passes(&self) -> f64 {
        self.units as f64 / self.n as f64
    }
}

/// Appends rows only when the work counter has advanced, keeping
/// `effective_passes` strictly increasing.
#[derive(Debug)]
pub(crate) struct TraceRecorder {
    trace: RunTrace,
    start: Instant,
    last_units: Option<u64>,
}

impl TraceRecorder {
    pub(crate) fn new(trace: RunTrace) -> Self {
        Self {
            trace,
            start: Instant::now(),
            last_units: None,
        }
    }

    /// Returns whether a row was written.
    pub(crate) fn record(&mut self, work: &WorkCounter, objective: f64) -> bool {
        if self.last_units.is_some_and(|u| u >= work.units()) {
            return false;
        }
        self.last_units = Some(work.units());
        self.trace.rows.push(TraceRow {
            effective_passes: work.passes(),
            objective,
            suboptimality: None,
            wall_seconds: self.start.elapsed().as_secs_f64(),
        });
        true
    }

    pub(crate) fn would_record(&self, work: &WorkCounter) -> bool {
        !self.last_units.is_some_and(|u| u >= work.units())
    }

    pub(crate) fn finish(self) -> RunTrace {
        self.trace
    }
}
