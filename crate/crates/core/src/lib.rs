//! Mini-batch semi-stochastic gradient descent for composite problems
//! `min_x P(x) = (1/n) Σ_i φ(a_iᵀx, b_i) + R(x)` over sparse data.
//!
//! The solver lives in [`ms2gd`]; [`baselines`] holds comparison methods and
//! [`theory`] the closed-form rate and parameter formulas.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod libsvm;
pub mod ms2gd;
pub mod problem;
pub mod prox;
pub mod sampling;
pub mod sparse;
pub mod theory;
pub mod trace;

pub use baselines::{solve_baseline, BaselineConfig, BaselineSolver};
pub use error::{Error, Result};
pub use libsvm::{load_libsvm, read_libsvm, write_libsvm};
pub use ms2gd::{solve, Checkpoint, Solution, SolverConfig};
pub use problem::{CompositeProblem, Loss, RegKind, Regularizer};
pub use sparse::{lipschitz_constants, CsrMatrix, Dataset, Row};
pub use theory::{TheoryInputs, TheoryReport};
pub use trace::{RunTrace, TraceRow, WorkCounter};
