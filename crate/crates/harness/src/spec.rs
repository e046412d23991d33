//! JSON-serializable experiment descriptions.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ms2gd::{BaselineConfig, BaselineSolver, Loss, RegKind, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::synth::RCV1_SHAPE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSpec {
    Libsvm {
        path: PathBuf,
        #[serde(default)]
        normalize_rows: bool,
        #[serde(default)]
        expect_dim: Option<usize>,
        /// Keep only the first this many rows.
        #[serde(default)]
        head: Option<usize>,
    },
    LassoSynthetic {
        n: usize,
        band: usize,
        sigma: f64,
        seed: u64,
    },
    SparseLogistic {
        n: usize,
        d: usize,
        nnz_per_row: usize,
        seed: u64,
    },
    DenseLogistic {
        n: usize,
        d: usize,
        seed: u64,
    },
}

impl DataSpec {
    /// rcv1-shaped sparse data with `n` rows.
    pub fn rcv1_like(n: usize, seed: u64) -> Self {
        DataSpec::SparseLogistic {
            n,
            d: RCV1_SHAPE.1,
            nnz_per_row: RCV1_SHAPE.2,
            seed,
        }
    }
}

/// `λ` as a number or as `"c/n"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    PerRow(String),
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Value(0.0)
    }
}

impl LambdaSpec {
    pub fn resolve(&self, n: usize) -> Result<f64> {
        let v = match self {
            LambdaSpec::Value(v) => *v,
            LambdaSpec::PerRow(s) => {
                let coef = s
                    .trim()
                    .strip_suffix("/n")
                    .ok_or_else(|| HarnessError::validation(format!("lambda `{s}` is neither a number nor `c/n`")))?;
                let c: f64 = coef
                    .trim()
                    .parse()
                    .map_err(|_| HarnessError::validation(format!("lambda `{s}` has a bad coefficient")))?;
                c / n as f64
            }
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(HarnessError::validation(format!("lambda must be nonnegative, got {v}")));
        }
        Ok(v)
    }
}

impl FromStr for LambdaSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(v) = s.parse::<f64>() {
            return Ok(LambdaSpec::Value(v));
        }
        let spec = LambdaSpec::PerRow(s.to_string());
        spec.resolve(1)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    #[default]
    None,
    Fista,
    File(PathBuf),
}

impl FromStr for ReferencePolicy {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => ReferencePolicy::None,
            "fista" => ReferencePolicy::Fista,
            path => ReferencePolicy::File(path.into()),
        })
    }
}

/// Inner-loop bound as a count or a fraction of `n` (rounded up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InnerSteps {
    Count(usize),
    FractionOfN { frac_n: f64 },
}

impl InnerSteps {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let m = match *self {
            InnerSteps::Count(m) => m,
            InnerSteps::FractionOfN { frac_n } => {
                if !(frac_n > 0.0 && frac_n.is_finite()) {
                    return Err(HarnessError::validation(format!(
                        "m fraction must be positive, got {frac_n}"
                    )));
                }
                (frac_n * n as f64).ceil() as usize
            }
        };
        if m == 0 {
            return Err(HarnessError::validation("m must be at least 1"));
        }
        Ok(m)
    }
}

impl FromStr for InnerSteps {
    type Err = HarnessError;

    /// `"500"` or `"0.11n"`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(frac) = s.strip_suffix('n') {
            let frac_n = frac
                .parse()
                .map_err(|_| HarnessError::validation(format!("bad inner-step fraction `{s}`")))?;
            return Ok(InnerSteps::FractionOfN { frac_n });
        }
        s.parse()
            .map(InnerSteps::Count)
            .map_err(|_| HarnessError::validation(format!("bad inner-step count `{s}`")))
    }
}

/// Stepsize as an absolute value or a multiple of `1/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSize {
    Absolute(f64),
    OverL { times_inv_l: f64 },
}

impl StepSize {
    pub fn resolve(&self, lipschitz: f64) -> f64 {
        match *self {
            StepSize::Absolute(h) => h,
            StepSize::OverL { times_inv_l } => times_inv_l / lipschitz,
        }
    }

    /// Same units, different coefficient.
    pub fn with_value(&self, v: f64) -> StepSize {
        match self {
            StepSize::Absolute(_) => StepSize::Absolute(v),
            StepSize::OverL { .. } => StepSize::OverL { times_inv_l: v },
        }
    }

    pub fn coefficient(&self) -> f64 {
        match *self {
            StepSize::Absolute(h) => h,
            StepSize::OverL { times_inv_l } => times_inv_l,
        }
    }
}

impl FromStr for StepSize {
    type Err = HarnessError;

    /// `"0.5"` or `"5.5/L"`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(c) = s.strip_suffix("/L") {
            let times_inv_l = c
                .parse()
                .map_err(|_| HarnessError::validation(format!("bad stepsize `{s}`")))?;
            return Ok(StepSize::OverL { times_inv_l });
        }
        s.parse()
            .map(StepSize::Absolute)
            .map_err(|_| HarnessError::validation(format!("bad stepsize `{s}`")))
    }
}

impl fmt::Display for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSize::Absolute(h) => write!(f, "{h}"),
            StepSize::OverL { times_inv_l } => write!(f, "{times_inv_l}/L"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Ms2gd,
    Baseline(BaselineSolver),
}

impl FromStr for SolverKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ms2gd" {
            return Ok(SolverKind::Ms2gd);
        }
        s.parse::<BaselineSolver>()
            .map(SolverKind::Baseline)
            .map_err(|_| HarnessError::validation(format!("unknown solver `{s}`")))
    }
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default)]
    pub label: Option<String>,
    /// `ms2gd` or a baseline name.
    pub solver: String,
    #[serde(default = "one")]
    pub b: usize,
    #[serde(default)]
    pub m: Option<InnerSteps>,
    pub h: StepSize,
    pub epochs: usize,
    #[serde(default = "yes")]
    pub lazy: bool,
    /// Inner steps between checkpoints (mS2GD, S2GD) or extra rows per
    /// pass (SGD, SAG).
    #[serde(default)]
    pub checkpoints: usize,
}

impl SolverSpec {
    pub fn kind(&self) -> Result<SolverKind> {
        self.solver.parse()
    }

    pub fn label(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None if self.solver == "ms2gd" => format!("ms2gd_b{}", self.b),
            None => self.solver.clone(),
        }
    }

    /// Concrete parameters on a problem with `n` rows and constant `L`.
    pub fn resolve(&self, n: usize, lipschitz: f64) -> Result<ResolvedSolver> {
        let kind = self.kind()?;
        let needs_m = matches!(kind, SolverKind::Ms2gd | SolverKind::Baseline(BaselineSolver::S2gd));
        let m = match (self.m, needs_m) {
            (Some(m), _) => Some(m.resolve(n)?),
            (None, true) => return Err(HarnessError::validation(format!("solver `{}` needs m", self.solver))),
            (None, false) => None,
        };
        if kind == SolverKind::Ms2gd && (self.b == 0 || self.b > n) {
            return Err(HarnessError::validation(format!("b = {} not in [1, {n}]", self.b)));
        }
        let h = self.h.resolve(lipschitz);
        if !(h > 0.0 && h.is_finite()) {
            return Err(HarnessError::validation(format!("stepsize must be positive, got {h}")));
        }
        if self.epochs == 0 {
            return Err(HarnessError::validation("epochs must be at least 1"));
        }
        Ok(ResolvedSolver {
            label: self.label(),
            kind,
            b: self.b,
            m,
            h,
            epochs: self.epochs,
            lazy: self.lazy,
            checkpoints: self.checkpoints,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSolver {
    pub label: String,
    pub kind: SolverKind,
    pub b: usize,
    pub m: Option<usize>,
    pub h: f64,
    pub epochs: usize,
    pub lazy: bool,
    pub checkpoints: usize,
}

impl ResolvedSolver {
    pub fn ms2gd_config(&self, seed: u64) -> SolverConfig {
        SolverConfig::new(self.b, self.m.unwrap_or(1), self.h, self.epochs)
            .with_seed(seed)
            .with_lazy(self.lazy)
            .with_checkpoint_every(self.checkpoints)
    }

    pub fn baseline_config(&self, solver: BaselineSolver, seed: u64) -> BaselineConfig {
        let mut cfg = BaselineConfig::new(solver, self.h, self.epochs).with_seed(seed);
        cfg.max_inner_steps = self.m.unwrap_or(1);
        cfg.checkpoints_per_pass = self.checkpoints;
        cfg.lazy = self.lazy;
        cfg
    }

    /// Expected effective passes per epoch (or per iteration).
    pub fn expected_passes_per_epoch(&self, n: usize) -> f64 {
        match self.kind {
            SolverKind::Ms2gd => 1.0 + self.b as f64 * (self.m.unwrap_or(1) as f64 + 1.0) / n as f64,
            SolverKind::Baseline(BaselineSolver::S2gd) => 1.0 + (self.m.unwrap_or(1) as f64 + 1.0) / n as f64,
            SolverKind::Baseline(_) => 1.0,
        }
    }
}

fn zero_seed() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub data: DataSpec,
    pub loss: Loss,
    pub reg: RegKind,
    #[serde(default)]
    pub lambda: LambdaSpec,
    /// Strong convexity parameter; defaults to `λ` for `l2`.
    #[serde(default)]
    pub mu: Option<f64>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default = "zero_seed")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub reference: ReferencePolicy,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(HarnessError::validation("experiment lists no solvers"));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::validation("experiment lists no seeds"));
        }
        let mut labels: Vec<String> = self.solvers.iter().map(SolverSpec::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(HarnessError::validation(format!("duplicate solver label `{}`", w[0])));
        }
        for s in &self.solvers {
            s.kind()?;
        }
        if let LambdaSpec::Value(v) = self.lambda {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(HarnessError::validation(format!("lambda must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}
