//! Closed-form complexity theory of mS2GD: the sampling factor `α(b)`, the
//! rate `ρ(h, m)`, the workload-optimal `(h*, m*)` for a target rate, the
//! mini-batch threshold `b₀` and the `ρ = 1/e` parameter recipe.

use std::f64::consts::E;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest family size accepted by [`variance_lemma_check`].
pub const MAX_LEMMA_N: usize = 12;

/// Threshold recorded as the guaranteed-speedup bound on `b`.
pub const RECIPE_MAX_BATCH: usize = 29;

/// `α(b) = (n - b) / (b (n - 1))`.
pub fn alpha(n: usize, b: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Theory(format!("alpha needs n >= 2, got {n}")));
    }
    if b == 0 || b > n {
        return Err(Error::Theory(format!("batch size {b} not in [1, {n}]")));
    }
    Ok((n - b) as f64 / (b as f64 * (n - 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    pub n: usize,
    pub lipschitz: f64,
    pub mu: f64,
    pub batch: usize,
}

impl TheoryInputs {
    pub fn new(n: usize, lipschitz: f64, mu: f64, batch: usize) -> Result<Self> {
        let t = Self {
            n,
            lipschitz,
            mu,
            batch,
        };
        t.validate()?;
        Ok(t)
    }

    /// Inputs with `L = κ` and `μ = 1`.
    pub fn from_kappa(n: usize, kappa: f64, batch: usize) -> Result<Self> {
        Self::new(n, kappa, 1.0, batch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Theory(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.lipschitz.is_finite() && self.lipschitz >= self.mu) {
            return Err(Error::Theory(format!(
                "need mu <= L, got mu = {} and L = {}",
                self.mu, self.lipschitz
            )));
        }
        alpha(self.n, self.batch).map(|_| ())
    }

    pub fn kappa(&self) -> f64 {
        self.lipschitz / self.mu
    }

    pub fn alpha(&self) -> f64 {
        alpha(self.n, self.batch).expect("validated inputs")
    }
}

/// Hypothesis of the rate bound that a `(h, m)` pair fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateViolation {
    StepNotPositive,
    StepAboveInverseL,
    VarianceFactorAtLeastOne,
    InnerStepsNotPositive,
}

impl fmt::Display for RateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateViolation::StepNotPositive => "h > 0 violated",
            RateViolation::StepAboveInverseL => "h <= 1/L violated",
            RateViolation::VarianceFactorAtLeastOne => "4 h L alpha(b) < 1 violated",
            RateViolation::InnerStepsNotPositive => "m > 0 violated",
        })
    }
}

/// `ρ = 1/(m h μ (1 - 4hLα)) + 4hLα(m + 1)/(m (1 - 4hLα))`.
///
/// `m` is real so the continuous optimum can be substituted back.
pub fn rate_rho(t: &TheoryInputs, h: f64, m: f64) -> std::result::Result<f64, RateViolation> {
    if !(h > 0.0) {
        return Err(RateViolation::StepNotPositive);
    }
    if h > 1.0 / t.lipschitz {
        return Err(RateViolation::StepAboveInverseL);
    }
    if !(m > 0.0) {
        return Err(RateViolation::InnerStepsNotPositive);
    }
    let q = 4.0 * h * t.lipschitz * t.alpha();
    if q >= 1.0 {
        return Err(RateViolation::VarianceFactorAtLeastOne);
    }
    let damp = 1.0 - q;
    Ok(1.0 / (m * h * t.mu * damp) + q * (m + 1.0) / (m * damp))
}

/// Inner-loop length needed to reach rate `ρ` at stepsize `h`:
/// `m(h) = (1 + 4αh²Lμ) / (hμ(ρ - 4αhL(ρ + 1)))`, the inverse of
/// [`rate_rho`] in `m`. `None` where `ρ` is unreachable at this `h`.
pub fn inner_steps_for_rate(t: &TheoryInputs, rho: f64, h: f64) -> Option<f64> {
    let a = t.alpha();
    let denom = h * t.mu * (rho - 4.0 * a * h * t.lipschitz * (rho + 1.0));
    if !(h > 0.0) || denom <= 0.0 {
        return None;
    }
    Some((1.0 + 4.0 * a * h * h * t.lipschitz * t.mu) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "interior-stepsize")]
    Interior,
    #[serde(rename = "capped-at-1/L")]
    CappedAtInverseL,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Interior => "interior-stepsize",
            Regime::CappedAtInverseL => "capped-at-1/L",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalParams {
    pub h_star: f64,
    /// Unconstrained minimizer `h̃` of `m(h)`; infinite when `α = 0`.
    pub h_tilde: f64,
    pub m_continuous: f64,
    pub m_ceil: u64,
    pub regime: Regime,
}

/// `√(A² + B) - A` evaluated as `B / (√(A² + B) + A)`.
fn sqrt_gap(a: f64, b: f64) -> f64 {
    b / ((a * a + b).sqrt() + a)
}

/// Unconstrained minimizer `h̃ = √(((1+ρ)/(ρμ))² + 1/(4μαL)) - (1+ρ)/(ρμ)`.
pub fn h_tilde(t: &TheoryInputs, rho: f64) -> f64 {
    let a = t.alpha();
    if a == 0.0 {
        return f64::INFINITY;
    }
    sqrt_gap((1.0 + rho) / (rho * t.mu), 1.0 / (4.0 * t.mu * a * t.lipschitz))
}

/// Interior-regime optimum
/// `m* = (2κ/ρ){(1 + 1/ρ)4α + √(4α/κ + (1 + 1/ρ)²(4α)²)}`.
pub fn m_star_interior(t: &TheoryInputs, rho: f64) -> f64 {
    let a4 = 4.0 * t.alpha();
    let kappa = t.kappa();
    let c = 1.0 + 1.0 / rho;
    (2.0 * kappa / rho) * (c * a4 + (a4 / kappa + c * c * a4 * a4).sqrt())
}

/// Capped-regime optimum `m* = (κ + 4α)/(ρ - 4α(1 + ρ))` at `h = 1/L`.
pub fn m_star_capped(t: &TheoryInputs, rho: f64) -> Result<f64> {
    let a = t.alpha();
    let denom = rho - 4.0 * a * (1.0 + rho);
    if denom <= 0.0 {
        return Err(Error::Theory(format!(
            "rho unreachable at this b (rho - 4 alpha (1 + rho) = {denom:e})"
        )));
    }
    Ok((t.kappa() + 4.0 * a) / denom)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Theory(format!("target rate must lie in (0, 1), got {rho}")))
    }
}

/// Workload-minimizing `(h, m)` reaching rate `ρ` at the inputs' batch size.
pub fn optimal_params(t: &TheoryInputs, rho: f64) -> Result<OptimalParams> {
    t.validate()?;
    check_rho(rho)?;
    let ht = h_tilde(t, rho);
    let (h_star, m_continuous, regime) = if ht <= 1.0 / t.lipschitz {
        (ht, m_star_interior(t, rho), Regime::Interior)
    } else {
        (1.0 / t.lipschitz, m_star_capped(t, rho)?, Regime::CappedAtInverseL)
    };
    let achieved = rate_rho(t, h_star, m_continuous)
        .map_err(|v| Error::Theory(format!("optimal pair fails the rate hypotheses: {v}")))?;
    if achieved > rho * (1.0 + 1e-9) {
        return Err(Error::Theory(format!(
            "optimal pair reaches rate {achieved}, above target {rho}"
        )));
    }
    Ok(OptimalParams {
        h_star,
        h_tilde: ht,
        m_continuous,
        m_ceil: m_continuous.ceil() as u64,
        regime,
    })
}

/// `b₀ = (8ρnκ + 8nκ + 4ρn) / (ρnκ + (7ρ + 8)κ + 4ρ)`; `h̃ < 1/L` iff `b < b₀`.
pub fn b0(n: usize, kappa: f64, rho: f64) -> f64 {
    let n = n as f64;
    (8.0 * rho * n * kappa + 8.0 * n * kappa + 4.0 * rho * n)
        / (rho * n * kappa + (7.0 * rho + 8.0) * kappa + 4.0 * rho)
}

/// Parameters for rate `1/e` and `k = ⌈ln(1/ε)⌉` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub epochs: u64,
    pub step_size: f64,
    pub inner_steps: u64,
    pub b0: f64,
    pub regime: Regime,
    /// `(n + 2 b m_b) k`.
    pub total_work_units: f64,
    /// `b ≤ 29`, the range covered by the `O((n + κ) log(1/ε))` bound.
    pub within_threshold: bool,
}

pub fn corollary_recipe(t: &TheoryInputs, epsilon: f64) -> Result<Recipe> {
    t.validate()?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Theory(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let rho = 1.0 / E;
    let kappa = t.kappa();
    let a = t.alpha();
    let threshold = b0(t.n, kappa, rho);
    let (step_size, m, regime) = if (t.batch as f64) < threshold.ceil() && a > 0.0 {
        let h = sqrt_gap((1.0 + E) / t.mu, 1.0 / (4.0 * t.mu * a * t.lipschitz));
        let m = 8.0 * E * a * kappa * (E + 1.0 + (1.0 / (4.0 * a * kappa) + (1.0 + E) * (1.0 + E)).sqrt());
        (h, m, Regime::Interior)
    } else {
        (1.0 / t.lipschitz, m_star_capped(t, rho)?, Regime::CappedAtInverseL)
    };
    let epochs = (1.0 / epsilon).ln().ceil() as u64;
    let inner_steps = m.ceil() as u64;
    Ok(Recipe {
        epochs,
        step_size,
        inner_steps,
        b0: threshold,
        regime,
        total_work_units: (t.n as u64 + 2 * t.batch as u64 * inner_steps) as f64 * epochs as f64,
        within_threshold: t.batch <= RECIPE_MAX_BATCH,
    })
}

/// Both sides of the sampling-without-replacement variance bound
/// `E‖(1/τ)Σ_{i∈S} ξ_i - ξ̄‖² ≤ (1/(nτ))((n-τ)/(n-1)) Σ‖ξ_i‖²`, where `ξ̄`
/// is the family mean. The left side is computed by enumerating all
/// `C(n, τ)` subsets.
pub fn variance_lemma_check(xi: &[Vec<f64>], tau: usize) -> Result<(f64, f64)> {
    let n = xi.len();
    if n == 0 || n > MAX_LEMMA_N {
        return Err(Error::Theory(format!(
            "variance enumeration needs 1 <= n <= {MAX_LEMMA_N}, got {n}"
        )));
    }
    if tau == 0 || tau > n {
        return Err(Error::Theory(format!("subset size {tau} not in [1, {n}]")));
    }
    let d = xi[0].len();
    if xi.iter().any(|v| v.len() != d) {
        return Err(Error::Theory("family vectors differ in length".into()));
    }
    let mean: Vec<f64> = (0..d)
        .map(|j| xi.iter().map(|v| v[j]).sum::<f64>() / n as f64)
        .collect();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut avg = vec![0.0; d];
    for subset in (0..n).combinations(tau) {
        avg.iter_mut().for_each(|a| *a = 0.0);
        for &i in &subset {
            avg.iter_mut().zip(&xi[i]).for_each(|(a, v)| *a += v);
        }
        total += avg
            .iter()
            .zip(&mean)
            .map(|(a, m)| {
                let dev = a / tau as f64 - m;
                dev * dev
            })
            .sum::<f64>();
        count += 1;
    }
    let lhs = total / count as f64;
    let sq: f64 = xi.iter().flatten().map(|v| v * v).sum();
    let factor = if n == 1 { 0.0 } else { (n - tau) as f64 / (n - 1) as f64 };
    let rhs = factor * sq / (n as f64 * tau as f64);
    Ok((lhs, rhs))
}

/// Rate of a concrete `(h, m)` or the hypothesis it violates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateReport {
    Value(f64),
    Violated { flag: String, condition: String },
}

impl RateReport {
    fn from_result(r: std::result::Result<f64, RateViolation>) -> Self {
        match r {
            Ok(v) => RateReport::Value(v),
            Err(v) => RateReport::Violated {
                flag: "divergent-conditions-violated".into(),
                condition: v.to_string(),
            },
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            RateReport::Value(v) => Some(*v),
            RateReport::Violated { .. } => None,
        }
    }
}

/// Optional parts of a theory query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoryQuery {
    pub h: Option<f64>,
    pub m: Option<f64>,
    /// Target rate for the optimal parameters; `1/e` when absent.
    pub rho_target: Option<f64>,
    /// Target accuracy; the predicted work counts a single epoch when absent.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub n: usize,
    pub lipschitz: f64,
    pub mu: f64,
    pub kappa: f64,
    pub b: usize,
    pub alpha: f64,
    /// Rate of the queried `(h, m)`, or of `(h*, ⌈m*⌉)` when none was given.
    pub rho: RateReport,
    pub rho_target: f64,
    pub h_star: f64,
    pub m_star: f64,
    pub m_star_ceil: u64,
    pub b0: f64,
    pub epochs: u64,
    /// `(n + 2b⌈m*⌉) k` with `k = ⌈ln(1/ε) / ln(1/ρ_target)⌉`.
    pub total_work_units: f64,
    pub regime: Regime,
}

pub fn theory_report(t: &TheoryInputs, q: &TheoryQuery) -> Result<TheoryReport> {
    t.validate()?;
    let rho_target = q.rho_target.unwrap_or(1.0 / E);
    let opt = optimal_params(t, rho_target)?;
    let rho = match (q.h, q.m) {
        (Some(h), Some(m)) => RateReport::from_result(rate_rho(t, h, m)),
        (None, None) => RateReport::from_result(rate_rho(t, opt.h_star, opt.m_ceil as f64)),
        _ => return Err(Error::Theory("h and m must be given together".into())),
    };
    let epochs = match q.epsilon {
        Some(eps) if eps > 0.0 && eps < 1.0 => ((1.0 / eps).ln() / (1.0 / rho_target).ln()).ceil().max(1.0) as u64,
        Some(eps) => return Err(Error::Theory(format!("epsilon must lie in (0, 1), got {eps}"))),
        None => 1,
    };
    Ok(TheoryReport {
        n: t.n,
        lipschitz: t.lipschitz,
        mu: t.mu,
        kappa: t.kappa(),
        b: t.batch,
        alpha: t.alpha(),
        rho,
        rho_target,
        h_star: opt.h_star,
        m_star: opt.m_continuous,
        m_star_ceil: opt.m_ceil,
        b0: b0(t.n, t.kappa(), rho_target),
        epochs,
        total_work_units: (t.n as u64 + 2 * t.batch as u64 * opt.m_ceil) as f64 * epochs as f64,
        regime: opt.regime,
    })
}
