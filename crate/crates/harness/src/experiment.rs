//! Running an [`ExperimentSpec`]: data, reference value, solver runs, files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ms2gd::{load_libsvm, solve, solve_baseline, CompositeProblem, Dataset, Loss, RegKind, Regularizer, RunTrace};
use serde::{Deserialize, Serialize};

use crate::csv::{precision, trace_to_csv};
use crate::error::{HarnessError, Result};
use crate::reference::{cached_reference, problem_hash, read_reference};
use crate::spec::{DataSpec, ExperimentSpec, ReferencePolicy, ResolvedSolver, SolverKind};
use crate::synth::{dense_logistic, lasso_synthetic, sparse_logistic};

fn load_data(spec: &DataSpec) -> Result<(Dataset, Option<f64>)> {
    Ok(match spec {
        DataSpec::Libsvm {
            path,
            normalize_rows,
            expect_dim,
            head,
        } => {
            let mut data = load_libsvm(path, *expect_dim)?;
            if let Some(k) = head {
                if *k == 0 || *k > data.n_rows() {
                    return Err(HarnessError::validation(format!(
                        "head {k} not in [1, {}]",
                        data.n_rows()
                    )));
                }
                data = data.head(*k)?;
            }
            if *normalize_rows {
                data.normalize_rows();
            }
            (data, None)
        }
        DataSpec::LassoSynthetic { n, band, sigma, seed } => {
            let inst = lasso_synthetic(*n, *band, *sigma, 0.0, *seed)?;
            let mu = inst.problem.mu();
            (inst.problem.data().clone(), Some(mu))
        }
        DataSpec::SparseLogistic {
            n,
            d,
            nnz_per_row,
            seed,
        } => (sparse_logistic(*n, *d, *nnz_per_row, *seed)?, None),
        DataSpec::DenseLogistic { n, d, seed } => (dense_logistic(*n, *d, *seed)?, None),
    })
}

/// Builds the composite problem. Without an explicit `mu`, ℓ2 uses `λ`;
/// otherwise the generator's curvature estimate is used when the loss is
/// squared, and `1e-12 L` as a last resort.
pub fn build_problem(spec: &ExperimentSpec) -> Result<CompositeProblem> {
    let (data, data_mu) = load_data(&spec.data)?;
    let lambda = spec.lambda.resolve(data.n_rows())?;
    let reg = Regularizer::new(spec.reg, lambda)?;
    let mu = match (spec.mu, spec.reg) {
        (Some(mu), _) => Some(mu),
        (None, RegKind::L2) if lambda > 0.0 => None,
        (None, _) => match (data_mu, spec.loss) {
            (Some(mu), Loss::Squared) => Some(mu + if spec.reg == RegKind::L2 { lambda } else { 0.0 }),
            _ => Some(1e-12 * ms2gd::lipschitz_constants(&data, spec.loss).1.max(f64::MIN_POSITIVE)),
        },
    };
    Ok(CompositeProblem::new(data, spec.loss, reg, mu)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemStats {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub nnz: usize,
    pub lipschitz: f64,
    pub mu: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub hash: String,
}

impl ProblemStats {
    pub fn of(problem: &CompositeProblem) -> Self {
        Self {
            name: problem.data().name().to_string(),
            n: problem.n(),
            d: problem.dim(),
            nnz: problem.data().features().nnz(),
            lipschitz: problem.lipschitz(),
            mu: problem.mu(),
            kappa: problem.kappa(),
            lambda: problem.reg().lambda,
            hash: problem_hash(problem),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub label: String,
    pub solver: String,
    pub seed: u64,
    pub b: usize,
    pub m_used: Option<usize>,
    pub h_used: f64,
    pub epochs: usize,
    pub lazy: bool,
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub label: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: ExperimentSpec,
    pub problem: ProblemStats,
    pub x0: String,
    pub p_star: Option<f64>,
    pub runs: Vec<RunEntry>,
    pub failures: Vec<Failure>,
    pub precision: usize,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub entry: RunEntry,
    pub trace: RunTrace,
    pub csv: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub runs: Vec<RunRecord>,
    pub failures: Vec<Failure>,
    pub p_star: Option<f64>,
    pub manifest: Manifest,
}

impl ExperimentOutcome {
    pub fn run(&self, label: &str, seed: u64) -> Option<&RunRecord> {
        self.runs
            .iter()
            .find(|r| r.entry.label == label && r.entry.seed == seed)
    }
}

fn solver_name(kind: SolverKind) -> String {
    match kind {
        SolverKind::Ms2gd => "ms2gd".to_string(),
        SolverKind::Baseline(b) => b.name().to_string(),
    }
}

/// One run from the zero vector.
pub fn run_single(problem: &CompositeProblem, solver: &ResolvedSolver, seed: u64) -> Result<RunTrace> {
    let x0 = vec![0.0; problem.dim()];
    let sol = match solver.kind {
        SolverKind::Ms2gd => solve(problem, &solver.ms2gd_config(seed), &x0)?,
        SolverKind::Baseline(b) => solve_baseline(problem, &solver.baseline_config(b, seed), &x0)?,
    };
    Ok(sol.trace)
}

/// Runs `f` over `jobs` on all available cores, results in job order.
pub fn parallel_map<J: Sync, T: Send>(jobs: &[J], f: impl Fn(&J) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let out = f(&jobs[i]);
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("job finished"))
        .collect()
}

pub fn reference_value(
    spec: &ExperimentSpec,
    problem: &CompositeProblem,
    out_dir: Option<&Path>,
) -> Result<Option<f64>> {
    Ok(match &spec.reference {
        ReferencePolicy::None => None,
        ReferencePolicy::Fista => Some(cached_reference(problem, out_dir)?.p_star),
        ReferencePolicy::File(path) => Some(read_reference(path)?.p_star),
    })
}

/// Runs every solver for every seed. With `out_dir`, writes one CSV per run
/// and `manifest.json`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let problem = build_problem(spec)?;
    run_on_problem(spec, &problem, out_dir)
}

pub fn run_on_problem(
    spec: &ExperimentSpec,
    problem: &CompositeProblem,
    out_dir: Option<&Path>,
) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let resolved = spec
        .solvers
        .iter()
        .map(|s| s.resolve(problem.n(), problem.lipschitz()))
        .collect::<Result<Vec<_>>>()?;
    let p_star = reference_value(spec, problem, out_dir)?;

    let jobs: Vec<(&ResolvedSolver, u64)> = resolved
        .iter()
        .flat_map(|r| spec.seeds.iter().map(move |&s| (r, s)))
        .collect();
    let results = parallel_map(&jobs, |(r, seed)| run_single(problem, r, *seed));

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for ((r, seed), res) in jobs.iter().zip(results) {
        match res {
            Ok(mut trace) => {
                if let Some(p) = p_star {
                    trace.annotate(p);
                }
                let file = out_dir.map(|_| format!("{}_seed{}.csv", r.label, seed));
                let csv = trace_to_csv(&trace);
                runs.push(RunRecord {
                    entry: RunEntry {
                        label: r.label.clone(),
                        solver: solver_name(r.kind),
                        seed: *seed,
                        b: r.b,
                        m_used: r.m,
                        h_used: r.h,
                        epochs: r.epochs,
                        lazy: r.lazy,
                        file,
                    },
                    trace,
                    csv,
                });
            }
            Err(e) => failures.push(Failure {
                label: r.label.clone(),
                seed: *seed,
                error: e.to_string(),
            }),
        }
    }

    let manifest = Manifest {
        spec: spec.clone(),
        problem: ProblemStats::of(problem),
        x0: "zero".into(),
        p_star,
        runs: runs.iter().map(|r| r.entry.clone()).collect(),
        failures: failures.clone(),
        precision: precision(),
    };
    if let Some(dir) = out_dir {
        write_outputs(dir, &runs, &manifest)?;
    }
    Ok(ExperimentOutcome {
        runs,
        failures,
        p_star,
        manifest,
    })
}

fn write_outputs(dir: &Path, runs: &[RunRecord], manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for r in runs {
        if let Some(name) = &r.entry.file {
            let path = dir.join(name);
            fs::write(&path, &r.csv).map_err(|e| HarnessError::io(&path, e))?;
        }
    }
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).map_err(|source| HarnessError::Json {
        path: path.clone(),
        source,
    })?;
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

/// Reads an experiment spec, or the spec embedded in a manifest.
pub fn read_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let json_err = |source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
    let spec_value = match value.get("spec") {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(spec_value).map_err(json_err)
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}
