//! Reference optimal values `P*` and their on-disk cache.

use std::fs;
use std::path::{Path, PathBuf};

use ms2gd::baselines::solve_fista;
use ms2gd::{BaselineConfig, BaselineSolver, CompositeProblem};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const REFERENCE_TOLERANCE: f64 = 1e-12;
pub const REFERENCE_MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub p_star: f64,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub problem_hash: Option<String>,
}

/// Hex SHA-256 over the matrix arrays, labels, loss and regularizer.
pub fn problem_hash(problem: &CompositeProblem) -> String {
    let a = problem.data().features();
    let mut h = Sha256::new();
    h.update((a.n_rows() as u64).to_le_bytes());
    h.update((a.n_cols() as u64).to_le_bytes());
    for &o in a.row_offsets() {
        h.update((o as u64).to_le_bytes());
    }
    for &j in a.col_indices() {
        h.update((j as u64).to_le_bytes());
    }
    for v in a.values().iter().chain(problem.data().labels()) {
        h.update(v.to_bits().to_le_bytes());
    }
    let reg = problem.reg();
    h.update(problem.loss().name().as_bytes());
    h.update(reg.kind.name().as_bytes());
    h.update(reg.lambda.to_bits().to_le_bytes());
    format!("{:x}", h.finalize())
}

/// Restarted FISTA with stepsize `1/L` until the gradient mapping is below
/// `REFERENCE_TOLERANCE`.
pub fn compute_reference(problem: &CompositeProblem) -> Result<ReferenceValue> {
    let mut cfg = BaselineConfig::new(BaselineSolver::Fista, 1.0 / problem.lipschitz(), REFERENCE_MAX_ITERS);
    cfg.restart = true;
    cfg.tolerance = Some(REFERENCE_TOLERANCE);
    let sol = solve_fista(problem, &cfg, &vec![0.0; problem.dim()])?;
    let p_star = problem.objective(&sol.x)?;
    if !p_star.is_finite() {
        return Err(HarnessError::Runtime(
            "reference solve produced a non-finite objective".into(),
        ));
    }
    Ok(ReferenceValue {
        p_star,
        iterations: Some(sol.trace.rows.len().saturating_sub(1)),
        problem_hash: Some(problem_hash(problem)),
    })
}

pub fn cache_path(dir: &Path, problem: &CompositeProblem) -> PathBuf {
    dir.join(format!("reference-{}.json", problem_hash(problem)))
}

/// Cached reference in `dir` if present, otherwise computed and stored there.
pub fn cached_reference(problem: &CompositeProblem, dir: Option<&Path>) -> Result<ReferenceValue> {
    let Some(dir) = dir else {
        return compute_reference(problem);
    };
    let path = cache_path(dir, problem);
    if path.exists() {
        return read_reference(&path);
    }
    let value = compute_reference(problem)?;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let text = serde_json::to_string_pretty(&value).map_err(|source| HarnessError::Json {
        path: path.clone(),
        source,
    })?;
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(value)
}

/// Accepts `{"p_star": …}` or a bare number.
pub fn read_reference(path: &Path) -> Result<ReferenceValue> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    if let Ok(v) = text.trim().parse::<f64>() {
        return Ok(ReferenceValue {
            p_star: v,
            iterations: None,
            problem_hash: None,
        });
    }
    serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })
}
