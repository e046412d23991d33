//! Composite objective `P(x) = (1/n) Σ φ(a_iᵀx, b_i) + R(x)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{lipschitz_constants, Dataset};

/// Univariate loss `φ(u, label)` applied to `u = a_iᵀx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// `log(1 + exp(-label·u))`
    Logistic,
    /// `½(u - label)²`
    Squared,
}

impl Loss {
    #[inline]
    pub fn value(self, u: f64, label: f64) -> f64 {
        match self {
            Loss::Logistic => softplus(-label * u),
            Loss::Squared => {
                let r = u - label;
                0.5 * r * r
            }
        }
    }

    #[inline]
    pub fn derivative(self, u: f64, label: f64) -> f64 {
        match self {
            Loss::Logistic => -label * sigmoid(-label * u),
            Loss::Squared => u - label,
        }
    }

    /// Upper bound on `φ''`, so that `L_i = curvature_bound · ‖a_i‖²`.
    pub fn curvature_bound(self) -> f64 {
        match self {
            Loss::Logistic => 0.25,
            Loss::Squared => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::Squared => "squared",
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(Loss::Logistic),
            "squared" => Ok(Loss::Squared),
            other => Err(Error::UnknownLoss(other.to_string())),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Branch-wise logistic sigmoid; never overflows.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegKind {
    None,
    L2,
    L1,
}

impl RegKind {
    pub fn name(self) -> &'static str {
        match self {
            RegKind::None => "none",
            RegKind::L2 => "l2",
            RegKind::L1 => "l1",
        }
    }
}

impl FromStr for RegKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(RegKind::None),
            "l2" => Ok(RegKind::L2),
            "l1" => Ok(RegKind::L1),
            other => Err(Error::UnknownRegularizer(other.to_string())),
        }
    }
}

impl fmt::Display for RegKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Separable regularizer: `(λ/2)‖x‖²`, `λ‖x‖₁`, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularizer {
    pub kind: RegKind,
    pub lambda: f64,
}

impl Regularizer {
    pub fn new(kind: RegKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::config(format!(
                "regularization parameter must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(Self { kind, lambda })
    }

    pub const fn none() -> Self {
        Self {
            kind: RegKind::None,
            lambda: 0.0,
        }
    }

    pub fn l2(lambda: f64) -> Self {
        Self::new(RegKind::L2, lambda).expect("valid lambda")
    }

    pub fn l1(lambda: f64) -> Self {
        Self::new(RegKind::L1, lambda).expect("valid lambda")
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            RegKind::None => 0.0,
            RegKind::L2 => 0.5 * self.lambda * x.iter().map(|v| v * v).sum::<f64>(),
            RegKind::L1 => self.lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }
}

/// Loss, regularizer, data and the constants `L` and `μ` needed by solvers
/// and the complexity theory. Immutable once built.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    data: Dataset,
    loss: Loss,
    reg: Regularizer,
    row_lipschitz: Vec<f64>,
    lipschitz: f64,
    mu: f64,
}

impl CompositeProblem {
    /// `mu` defaults to `λ` for ℓ2 regularization and is required otherwise.
    pub fn new(data: Dataset, loss: Loss, reg: Regularizer, mu: Option<f64>) -> Result<Self> {
        if loss == Loss::Logistic {
            data.check_binary_labels()?;
        }
        let mu = match (mu, reg.kind) {
            (Some(mu), _) => mu,
            (None, RegKind::L2) => reg.lambda,
            (None, kind) => {
                return Err(Error::config(format!(
                    "strong convexity parameter mu must be supplied for regularizer `{kind}`"
                )))
            }
        };
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::config(format!(
                "strong convexity parameter mu must be positive, got {mu}"
            )));
        }
        let (row_lipschitz, lipschitz) = lipschitz_constants(&data, loss);
        if !(lipschitz > 0.0) {
            return Err(Error::config("all rows are empty; Lipschitz constant is zero"));
        }
        Ok(Self {
            data,
            loss,
            reg,
            row_lipschitz,
            lipschitz,
            mu,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn reg(&self) -> Regularizer {
        self.reg
    }

    /// Number of component functions `n`.
    pub fn n(&self) -> usize {
        self.data.n_rows()
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.data.n_cols()
    }

    /// `L = max_i L_i`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn row_lipschitz(&self) -> &[f64] {
        &self.row_lipschitz
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.lipschitz / self.mu
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// `φ'_i(a_iᵀx)`, the scalar factor of `∇f_i(x) = φ'_i(a_iᵀx) a_i`.
    #[inline]
    pub fn row_derivative(&self, i: usize, x: &[f64]) -> f64 {
        let u = self.data.features().row(i).dot(x);
        self.loss.derivative(u, self.data.labels()[i])
    }

    /// `∇f_i(x)` as a dense vector.
    pub fn component_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if i >= self.n() {
            return Err(Error::RowOutOfRange {
                index: i,
                n_rows: self.n(),
            });
        }
        let mut g = vec![0.0; self.dim()];
        let c = self.row_derivative(i, x);
        for (j, v) in self.data.features().row(i).iter() {
            g[j] = c * v;
        }
        Ok(g)
    }

    /// `f_i(x)`.
    pub fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let u = self.data.features().row(i).dot(x);
        self.loss.value(u, self.data.labels()[i])
    }

    /// `∇F(x) = (1/n) Σ ∇f_i(x)`, rows accumulated in index order. Excludes `R`.
    pub fn full_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.full_gradient_into(x, &mut out)?;
        Ok(out)
    }

    pub fn full_gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        self.check_dim(out)?;
        out.iter_mut().for_each(|v| *v = 0.0);
        let m = self.data.features();
        for i in 0..self.n() {
            let c = self.row_derivative(i, x);
            for (j, v) in m.row(i).iter() {
                out[j] += c * v;
            }
        }
        let inv_n = 1.0 / self.n() as f64;
        out.iter_mut().for_each(|v| *v *= inv_n);
        Ok(())
    }

    /// Variance-reduced estimate
    /// `G = g_ref + (1/b) Σ_{i∈batch} [φ'_i(a_iᵀy) - φ'_i(a_iᵀx_ref)] a_i`.
    pub fn stochastic_estimate(&self, y: &[f64], x_ref: &[f64], g_ref: &[f64], batch: &[usize]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        self.check_dim(x_ref)?;
        self.check_dim(g_ref)?;
        validate_batch(batch, self.n())?;
        let mut out = g_ref.to_vec();
        self.add_correction(y, x_ref, batch, &mut out);
        Ok(out)
    }

    /// Adds `(1/b) Σ_{i∈batch} [φ'_i(a_iᵀy) - φ'_i(a_iᵀx_ref)] a_i` into `out`.
    pub(crate) fn add_correction(&self, y: &[f64], x_ref: &[f64], batch: &[usize], out: &mut [f64]) {
        let inv_b = 1.0 / batch.len() as f64;
        let m = self.data.features();
        for &i in batch {
            let c = (self.row_derivative(i, y) - self.row_derivative(i, x_ref)) * inv_b;
            for (j, v) in m.row(i).iter() {
                out[j] += c * v;
            }
        }
    }

    /// `F(x)`.
    pub fn smooth_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let total: f64 = (0..self.n()).map(|i| self.component_value(i, x)).sum();
        Ok(total / self.n() as f64)
    }

    /// `P(x) = F(x) + R(x)`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        Ok(self.smooth_value(x)? + self.reg.value(x))
    }
}

/// A batch must be nonempty, in range and free of duplicates.
pub fn validate_batch(batch: &[usize], n: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidBatch("empty batch".into()));
    }
    let mut seen = vec![false; n];
    for &i in batch {
        if i >= n {
            return Err(Error::InvalidBatch(format!("index {i} out of range for n = {n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidBatch(format!("duplicate index {i}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    fn identity_squared() -> CompositeProblem {
        let a = CsrMatrix::from_dense(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = Dataset::new(a, vec![0.0, 0.0], "id").unwrap();
        CompositeProblem::new(d, Loss::Squared, Regularizer::none(), Some(0.5)).unwrap()
    }

    fn small_logistic() -> CompositeProblem {
        let a = CsrMatrix::from_dense(3, &[vec![1.0, 0.0, 2.0], vec![0.0, -1.0, 0.5], vec![3.0, 1.0, 0.0]]).unwrap();
        let d = Dataset::new(a, vec![1.0, -1.0, 1.0], "log").unwrap();
        CompositeProblem::new(d, Loss::Logistic, Regularizer::l2(0.1), None).unwrap()
    }

    #[test]
    fn squared_identity_gradient() {
        let p = identity_squared();
        assert_eq!(p.full_gradient(&[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn logistic_gradient_at_zero() {
        let p = small_logistic();
        let g = p.full_gradient(&[0.0; 3]).unwrap();
        let m = p.data().features();
        let mut expected = vec![0.0; 3];
        for i in 0..3 {
            for (j, v) in m.row(i).iter() {
                expected[j] -= p.data().labels()[i] / 2.0 * v / 3.0;
            }
        }
        for (a, b) in g.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn objective_at_zero() {
        let p = small_logistic();
        assert!((p.objective(&[0.0; 3]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);

        let a = CsrMatrix::from_dense(1, &[vec![1.0], vec![2.0]]).unwrap();
        let d = Dataset::new(a, vec![3.0, -1.0], "sq").unwrap();
        let p = CompositeProblem::new(d, Loss::Squared, Regularizer::l1(1.0), Some(1.0)).unwrap();
        assert_eq!(p.objective(&[0.0]).unwrap(), 0.5 * (9.0 + 1.0) / 2.0);
    }

    #[test]
    fn estimate_at_reference_is_reference_gradient() {
        let p = small_logistic();
        let x = [0.3, -0.2, 0.7];
        let g = p.full_gradient(&x).unwrap();
        let est = p.stochastic_estimate(&x, &x, &g, &[2, 0]).unwrap();
        assert_eq!(est, g);
    }

    #[test]
    fn full_batch_estimate_is_full_gradient() {
        let p = small_logistic();
        let x_ref = [0.3, -0.2, 0.7];
        let y = [-1.0, 0.4, 0.1];
        let g_ref = p.full_gradient(&x_ref).unwrap();
        let est = p.stochastic_estimate(&y, &x_ref, &g_ref, &[0, 1, 2]).unwrap();
        let g_y = p.full_gradient(&y).unwrap();
        for (a, b) in est.iter().zip(&g_y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_validation() {
        let p = small_logistic();
        let x = [0.0; 3];
        assert!(matches!(
            p.stochastic_estimate(&x, &x, &x, &[]),
            Err(Error::InvalidBatch(_))
        ));
        assert!(matches!(
            p.stochastic_estimate(&x, &x, &x, &[1, 1]),
            Err(Error::InvalidBatch(_))
        ));
        assert!(matches!(
            p.stochastic_estimate(&x, &x, &x, &[3]),
            Err(Error::InvalidBatch(_))
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let p = small_logistic();
        assert!(matches!(
            p.full_gradient(&[0.0; 2]),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
        assert!(p.objective(&[0.0; 4]).is_err());
    }

    #[test]
    fn mu_defaults_and_requirements() {
        assert_eq!(small_logistic().mu(), 0.1);
        let a = CsrMatrix::from_dense(1, &[vec![1.0]]).unwrap();
        let d = Dataset::new(a, vec![1.0], "t").unwrap();
        assert!(CompositeProblem::new(d.clone(), Loss::Logistic, Regularizer::l1(0.1), None).is_err());
        assert!(CompositeProblem::new(d, Loss::Logistic, Regularizer::l1(0.1), Some(0.2)).is_ok());
    }

    #[test]
    fn logistic_rejects_non_binary_labels() {
        let a = CsrMatrix::from_dense(1, &[vec![1.0]]).unwrap();
        let d = Dataset::new(a, vec![0.0], "t").unwrap();
        assert!(matches!(
            CompositeProblem::new(d.clone(), Loss::Logistic, Regularizer::l2(1.0), None),
            Err(Error::InvalidLabel { .. })
        ));
        // the same data is fine for regression
        assert!(CompositeProblem::new(d, Loss::Squared, Regularizer::l2(1.0), None).is_ok());
    }

    #[test]
    fn logistic_is_stable_for_large_margins() {
        for &u in &[-800.0, -40.0, 40.0, 800.0] {
            for &b in &[-1.0, 1.0] {
                let v = Loss::Logistic.value(u, b);
                let d = Loss::Logistic.derivative(u, b);
                assert!(v.is_finite() && d.is_finite(), "u={u} b={b}");
                assert!(v >= 0.0 && d.abs() <= 1.0);
            }
        }
        assert!((Loss::Logistic.value(800.0, -1.0) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn parse_ids() {
        assert_eq!("logistic".parse::<Loss>().unwrap(), Loss::Logistic);
        assert!(matches!("hinge".parse::<Loss>(), Err(Error::UnknownLoss(_))));
        assert_eq!("l1".parse::<RegKind>().unwrap(), RegKind::L1);
        assert!("elastic".parse::<RegKind>().is_err());
        assert!(Regularizer::new(RegKind::L2, -1.0).is_err());
    }
}
