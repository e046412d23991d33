//! Proximal operators of the separable regularizers and their `τ`-fold
//! compositions used by the lazy update engine.
//!
//! `prox^τ[y, g]` denotes `τ` applications of `ỹ ← prox_{hR}(ỹ - h g)` to a
//! single coordinate whose gradient component `g` stays fixed. The naive
//! loop is the reference; the ℓ1 and ℓ2 closed forms evaluate it in O(1)
//! (O(log τ) for the power in the ℓ2 case).

use crate::error::{Error, Result};
use crate::problem::{RegKind, Regularizer};

/// `prox_{hR}` on a single coordinate. No argument checks.
#[inline]
pub fn prox_scalar(reg: &Regularizer, h: f64, z: f64) -> f64 {
    match reg.kind {
        RegKind::None => z,
        RegKind::L2 => z / (1.0 + reg.lambda * h),
        RegKind::L1 => soft_threshold(z, reg.lambda * h),
    }
}

/// `sign(z) · max(|z| - t, 0)`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// `prox_{hR}(z) = argmin_x ½‖x - z‖² + h R(x)`, coordinate-wise.
pub fn prox_step(reg: &Regularizer, h: f64, z: &[f64]) -> Result<Vec<f64>> {
    check_step(h)?;
    Ok(z.iter().map(|&v| prox_scalar(reg, h, v)).collect())
}

/// In-place variant of [`prox_step`].
pub fn prox_step_in_place(reg: &Regularizer, h: f64, z: &mut [f64]) -> Result<()> {
    check_step(h)?;
    z.iter_mut().for_each(|v| *v = prox_scalar(reg, h, *v));
    Ok(())
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("stepsize must be positive, got {h}")));
    }
    Ok(())
}

/// One deferred coordinate: stale value `y`, frozen gradient component `g`,
/// number of skipped iterations `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LazyProxQuery {
    pub y: f64,
    pub g: f64,
    pub tau: u64,
    pub h: f64,
    pub reg: Regularizer,
}

impl LazyProxQuery {
    fn validate(&self) -> Result<()> {
        check_step(self.h)?;
        if !(self.reg.lambda >= 0.0) {
            return Err(Error::config("regularization parameter must be nonnegative"));
        }
        Ok(())
    }
}

/// Reference oracle: apply the scalar prox step `tau` times.
pub fn prox_tau_naive(q: &LazyProxQuery) -> Result<f64> {
    q.validate()?;
    Ok(naive(&q.reg, q.h, q.y, q.g, q.tau))
}

fn naive(reg: &Regularizer, h: f64, y: f64, g: f64, tau: u64) -> f64 {
    let mut v = y;
    for _ in 0..tau {
        v = prox_scalar(reg, h, v - h * g);
    }
    v
}

/// Closed form for `R = (λ/2)‖x‖²`:
/// `β^τ y - (hβ/(1-β))(1-β^τ) g` with `β = 1/(1+λh)`.
///
/// `hβ/(1-β)` equals `1/λ`, and `1-β^τ` is evaluated through `expm1` so the
/// small-`λh` regime keeps full relative accuracy. `λ = 0` returns the limit
/// `y - τhg`.
pub fn prox_tau_l2(q: &LazyProxQuery) -> Result<f64> {
    q.validate()?;
    if q.reg.kind != RegKind::L2 {
        return Err(Error::config("prox_tau_l2 requires an l2 regularizer"));
    }
    Ok(l2_closed_form(q.reg.lambda, q.h, q.y, q.g, q.tau))
}

#[inline]
fn l2_closed_form(lambda: f64, h: f64, y: f64, g: f64, tau: u64) -> f64 {
    if tau == 0 {
        return y;
    }
    let lh = lambda * h;
    if lh == 0.0 {
        return y - tau as f64 * h * g;
    }
    let beta = 1.0 / (1.0 + lh);
    let beta_tau = pow_by_squaring(beta, tau);
    let one_minus_beta_tau = -(-(tau as f64) * lh.ln_1p()).exp_m1();
    beta_tau * y - one_minus_beta_tau * g / lambda
}

/// `base^exp` by repeated squaring.
pub fn pow_by_squaring(mut base: f64, mut exp: u64) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// Closed form for `R = λ‖x‖₁`, `λ > 0`, by case split on the frozen
/// gradient component. With `M = (λ+g)h` and `m = -(λ-g)h`:
///
/// 1. `g ≥ λ`, `p = ⌊y/M⌋`: `y - τM` if `p ≥ τ`, else
///    `min{y - [p]₊M, m} - (τ - [p]₊)m`.
/// 2. `|g| < λ`: `max{y - τM, 0}` for `y ≥ 0`, `min{y - τm, 0}` otherwise.
/// 3. `g ≤ -λ`, `q = ⌊y/m⌋`: `y - τm` if `q ≥ τ`, else
///    `max{y - [q]₊m, M} - (τ - [q]₊)M`.
///
/// Floors are floors of the real quotient, so a negative `m` gives
/// `⌊1/-0.5⌋ = -2`.
pub fn prox_tau_l1(q: &LazyProxQuery) -> Result<f64> {
    q.validate()?;
    if q.reg.kind != RegKind::L1 {
        return Err(Error::config("prox_tau_l1 requires an l1 regularizer"));
    }
    if q.reg.lambda == 0.0 {
        return Err(Error::config(
            "prox_tau_l1 requires lambda > 0; use the unregularized path for lambda = 0",
        ));
    }
    Ok(l1_closed_form(q.reg.lambda, q.h, q.y, q.g, q.tau))
}

/// Divisors smaller than this fall back to the exact loop.
const TINY_DIVISOR: f64 = 1e-300;

#[inline]
fn l1_closed_form(lambda: f64, h: f64, y: f64, g: f64, tau: u64) -> f64 {
    if tau == 0 {
        return y;
    }
    let t = tau as f64;
    let big_m = (lambda + g) * h;
    let small_m = -(lambda - g) * h;
    if g >= lambda {
        if big_m.abs() < TINY_DIVISOR {
            return naive(&Regularizer::l1(lambda), h, y, g, tau);
        }
        let p = (y / big_m).floor();
        if p >= t {
            y - t * big_m
        } else {
            let p_plus = p.max(0.0);
            (y - p_plus * big_m).min(small_m) - (t - p_plus) * small_m
        }
    } else if g > -lambda {
        if y >= 0.0 {
            (y - t * big_m).max(0.0)
        } else {
            (y - t * small_m).min(0.0)
        }
    } else {
        if small_m.abs() < TINY_DIVISOR {
            return naive(&Regularizer::l1(lambda), h, y, g, tau);
        }
        let q = (y / small_m).floor();
        if q >= t {
            y - t * small_m
        } else {
            let q_plus = q.max(0.0);
            (y - q_plus * small_m).max(big_m) - (t - q_plus) * big_m
        }
    }
}

/// `prox^τ[y, g]` through the closed form of the given regularizer.
///
/// This is the kernel of the lazy solvers; arguments are not validated.
#[inline]
pub fn prox_tau(reg: &Regularizer, h: f64, y: f64, g: f64, tau: u64) -> f64 {
    match reg.kind {
        _ if tau == 0 => y,
        RegKind::None => y - tau as f64 * h * g,
        RegKind::L2 => l2_closed_form(reg.lambda, h, y, g, tau),
        RegKind::L1 if reg.lambda == 0.0 => y - tau as f64 * h * g,
        RegKind::L1 => l1_closed_form(reg.lambda, h, y, g, tau),
    }
}

/// Checked form of [`prox_tau`].
pub fn prox_tau_closed(q: &LazyProxQuery) -> Result<f64> {
    q.validate()?;
    Ok(prox_tau(&q.reg, q.h, q.y, q.g, q.tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(reg: Regularizer, y: f64, g: f64, tau: u64, h: f64) -> LazyProxQuery {
        LazyProxQuery { y, g, tau, h, reg }
    }

    #[test]
    fn l1_prox_soft_thresholds() {
        let out = prox_step(&Regularizer::l1(0.5), 1.0, &[2.0, -0.3, 0.0]).unwrap();
        assert_eq!(out, vec![1.5, 0.0, 0.0]);
    }

    #[test]
    fn l2_prox_shrinks() {
        assert_eq!(prox_step(&Regularizer::l2(1.0), 1.0, &[4.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn none_prox_is_identity() {
        assert_eq!(
            prox_step(&Regularizer::none(), 0.3, &[1.0, -2.0]).unwrap(),
            vec![1.0, -2.0]
        );
    }

    #[test]
    fn nonpositive_step_rejected() {
        assert!(prox_step(&Regularizer::l1(1.0), 0.0, &[1.0]).is_err());
        assert!(prox_step(&Regularizer::l1(1.0), -1.0, &[1.0]).is_err());
        assert!(prox_tau_naive(&query(Regularizer::l2(1.0), 1.0, 0.0, 1, 0.0)).is_err());
    }

    #[test]
    fn naive_zero_and_one_application() {
        let reg = Regularizer::l1(0.7);
        assert_eq!(prox_tau_naive(&query(reg, 1.3, 0.2, 0, 0.5)).unwrap(), 1.3);
        let one = prox_tau_naive(&query(reg, 1.3, 0.2, 1, 0.5)).unwrap();
        assert_eq!(one, prox_scalar(&reg, 0.5, 1.3 - 0.5 * 0.2));
    }

    #[test]
    fn naive_without_regularizer_telescopes() {
        let v = prox_tau_naive(&query(Regularizer::none(), 1.0, 0.25, 8, 0.5)).unwrap();
        assert!((v - (1.0 - 8.0 * 0.5 * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn l2_single_step_collapse() {
        let reg = Regularizer::l2(2.0);
        let (y, g, h) = (0.8, -0.4, 0.3);
        let beta = 1.0 / (1.0 + 2.0 * h);
        let closed = prox_tau_l2(&query(reg, y, g, 1, h)).unwrap();
        assert!((closed - beta * (y - h * g)).abs() < 1e-15);
        let naive = prox_tau_naive(&query(reg, y, g, 1, h)).unwrap();
        assert!((closed - naive).abs() < 1e-15);
    }

    #[test]
    fn l2_zero_lambda_limit() {
        let v = prox_tau_l2(&query(Regularizer::l2(0.0), 1.0, 0.2, 5, 0.1)).unwrap();
        assert!((v - 0.9).abs() < 1e-15);
    }

    #[test]
    fn l2_large_tau_is_stable() {
        let reg = Regularizer::l2(1e-4);
        let v = prox_tau_l2(&query(reg, 1.0, 0.3, 1_000_000_000, 0.5)).unwrap();
        // fixed point of y ← (y - hg)/(1+λh) is -g/λ
        assert!((v + 0.3 / 1e-4).abs() < 1e-6, "{v}");
    }

    #[test]
    fn l1_case_two_examples() {
        // λ = 0.3, g = 0, h = 1 gives M = 0.3
        let reg = Regularizer::l1(0.3);
        assert_eq!(prox_tau_l1(&query(reg, 1.0, 0.0, 10, 1.0)).unwrap(), 0.0);
        let v = prox_tau_l1(&query(reg, 1.0, 0.0, 2, 1.0)).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
    }

    #[test]
    fn l1_rejects_zero_lambda() {
        assert!(prox_tau_l1(&query(Regularizer::l1(0.0), 1.0, 0.0, 2, 1.0)).is_err());
        assert!(prox_tau_l1(&query(Regularizer::l2(1.0), 1.0, 0.0, 2, 1.0)).is_err());
    }

    #[test]
    fn negative_denominator_floor() {
        assert_eq!((1.0f64 / -0.5).floor(), -2.0);
        // case 3 with y between m and M: q ≤ 0
        let reg = Regularizer::l1(1.0);
        let q = query(reg, 0.5, -2.0, 3, 0.5);
        assert!((prox_tau_l1(&q).unwrap() - prox_tau_naive(&q).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn l1_exact_boundaries() {
        let reg = Regularizer::l1(0.5);
        for &g in &[0.5, -0.5] {
            for &y in &[-2.0, -0.25, 0.0, 0.25, 2.0, 1.0, 0.5] {
                for tau in 0..12 {
                    let q = query(reg, y, g, tau, 0.5);
                    let a = prox_tau_l1(&q).unwrap();
                    let b = prox_tau_naive(&q).unwrap();
                    assert!((a - b).abs() < 1e-13, "g={g} y={y} tau={tau}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn l1_floor_ties() {
        // y an exact multiple of M = (λ+g)h = 0.5
        let reg = Regularizer::l1(0.25);
        for k in 0..6 {
            let y = 0.5 * k as f64;
            for tau in 0..10 {
                let q = query(reg, y, 0.75, tau, 0.5);
                let a = prox_tau_l1(&q).unwrap();
                let b = prox_tau_naive(&q).unwrap();
                assert!((a - b).abs() < 1e-13, "y={y} tau={tau}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn pow_matches_powi() {
        for e in [0u64, 1, 2, 3, 17, 64, 1000] {
            let a = pow_by_squaring(0.97, e);
            let b = 0.97f64.powi(e as i32);
            // Both sides carry a relative rounding error of order e·ε.
            let tol = 2.0 * (e as f64 + 1.0) * f64::EPSILON;
            assert!((a - b).abs() <= tol * b.abs(), "e={e}: {a} vs {b}");
        }
    }

    #[test]
    fn dispatch_uses_closed_forms() {
        let reg = Regularizer::l1(0.0);
        assert_eq!(prox_tau(&reg, 0.5, 1.0, 0.2, 3), 1.0 - 3.0 * 0.5 * 0.2);
        assert_eq!(prox_tau(&Regularizer::l2(1.0), 0.5, 1.0, 0.2, 0), 1.0);
    }
}
