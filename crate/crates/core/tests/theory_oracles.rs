mod common;

use std::f64::consts::E;

use ms2gd::theory::{
    b0, corollary_recipe, h_tilde, inner_steps_for_rate, m_star_capped, m_star_interior, optimal_params, rate_rho,
    variance_lemma_check, Regime, TheoryInputs,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap()
}

/// The rate formula evaluated in exact rational arithmetic.
fn rate_exact(n: usize, b: usize, l: f64, mu: f64, h: f64, m: f64) -> f64 {
    let alpha = BigRational::new(BigInt::from(n - b), BigInt::from(b * (n - 1)));
    let (l, mu, h, m) = (exact(l), exact(mu), exact(h), exact(m));
    let one = BigRational::one();
    let q = BigRational::from_integer(4.into()) * &h * &l * alpha;
    let damp = &one - &q;
    let first = &one / (&m * &h * &mu * &damp);
    let second = &q * (&m + &one) / (&m * &damp);
    (first + second).to_f64().unwrap()
}

#[test]
fn rate_matches_exact_arithmetic_for_unit_batches() {
    for &(n, l, mu, h, m) in &[
        (100usize, 1.0, 0.01, 0.05, 500.0),
        (1000, 0.25, 1e-4, 0.1, 20_000.0),
        (37, 3.0, 0.2, 0.01, 123.0),
    ] {
        let t = TheoryInputs::new(n, l, mu, 1).unwrap();
        let got = rate_rho(&t, h, m).unwrap();
        let want = rate_exact(n, 1, l, mu, h, m);
        assert!((got - want).abs() <= 1e-12 * want.abs(), "{got} vs {want}");
    }
}

#[test]
fn rate_matches_exact_arithmetic_on_random_inputs() {
    let mut r = common::rng(50);
    for _ in 0..300 {
        let n = r.random_range(2..5000);
        let b = r.random_range(1..=n);
        let mu = 10f64.powf(r.random_range(-4.0..0.0));
        let l = mu * 10f64.powf(r.random_range(0.0..4.0));
        let t = TheoryInputs::new(n, l, mu, b).unwrap();
        let h = r.random_range(0.01..1.0) / l * (1.0 / (4.0 * t.alpha()).max(1.0));
        let m = r.random_range(1.0..1e6);
        let got = rate_rho(&t, h, m).unwrap();
        let want = rate_exact(n, b, l, mu, h, m);
        assert!((got - want).abs() <= 1e-12 * want.abs());
    }
}

#[test]
fn zero_alpha_rate_is_inverse_product() {
    let mut r = common::rng(51);
    for _ in 0..100 {
        let n = r.random_range(2..1000);
        let l = r.random_range(1.0..10.0);
        let mu = l / r.random_range(1.0..1e4);
        let t = TheoryInputs::new(n, l, mu, n).unwrap();
        let h = r.random_range(0.01..1.0) / l;
        let m = r.random_range(1.0..1e5);
        assert_eq!(rate_rho(&t, h, m).unwrap(), 1.0 / (m * h * mu));
    }
}

fn random_tuple(r: &mut rand_chacha::ChaCha8Rng) -> (TheoryInputs, f64) {
    loop {
        let n = 10f64.powf(r.random_range(1.0..6.0)) as usize;
        let kappa = 10f64.powf(r.random_range(0.0..6.0));
        let rho = r.random_range(0.05..0.95);
        let b = r.random_range(1..=n.min(200));
        let t = TheoryInputs::from_kappa(n, kappa, b).unwrap();
        if optimal_params(&t, rho).is_ok() {
            return (t, rho);
        }
    }
}

#[test]
fn optimal_stepsize_minimizes_inner_steps_on_a_grid() {
    let mut r = common::rng(52);
    let mut regimes = [0usize; 2];
    for _ in 0..200 {
        let (t, rho) = random_tuple(&mut r);
        let opt = optimal_params(&t, rho).unwrap();
        let best = inner_steps_for_rate(&t, rho, opt.h_star).unwrap();
        let h_max = 1.0 / t.lipschitz;
        for k in 1..=4000 {
            let h = h_max * k as f64 / 4000.0;
            if let Some(m) = inner_steps_for_rate(&t, rho, h) {
                assert!(m >= best * (1.0 - 1e-6), "{t:?} rho={rho} h={h}");
            }
        }
        for k in 1..=400 {
            let h = opt.h_star * (0.9 + 0.2 * k as f64 / 400.0);
            if h > h_max {
                break;
            }
            if let Some(m) = inner_steps_for_rate(&t, rho, h) {
                assert!(m >= best * (1.0 - 1e-6));
            }
        }
        let achieved = rate_rho(&t, opt.h_star, opt.m_continuous).unwrap();
        assert!((achieved - rho).abs() <= 1e-6 * rho);
        assert!(opt.m_ceil as f64 >= opt.m_continuous);
        regimes[(opt.regime == Regime::Interior) as usize] += 1;
    }
    assert!(regimes[0] > 0 && regimes[1] > 0, "{regimes:?}");
}

#[test]
fn interior_formula_agrees_with_proof_formula() {
    let mut r = common::rng(53);
    for _ in 0..200 {
        let (t, rho) = random_tuple(&mut r);
        if t.alpha() == 0.0 {
            continue;
        }
        let ht = h_tilde(&t, rho);
        if let Some(m) = inner_steps_for_rate(&t, rho, ht) {
            let closed = m_star_interior(&t, rho);
            assert!((closed - m).abs() <= 1e-9 * m, "{closed} vs {m}");
        }
    }
}

#[test]
fn capped_regime_uses_the_capped_formula() {
    let t = TheoryInputs::from_kappa(10_000, 100.0, 9_990).unwrap();
    let opt = optimal_params(&t, 0.3).unwrap();
    assert!(h_tilde(&t, 0.3) > 1.0 / 100.0);
    assert_eq!(opt.regime, Regime::CappedAtInverseL);
    assert_eq!(opt.m_continuous, m_star_capped(&t, 0.3).unwrap());
}

#[test]
fn threshold_matches_interior_predicate_on_random_settings() {
    let mut r = common::rng(54);
    for _ in 0..200 {
        let n = 10f64.powf(r.random_range(2.0..6.0)) as usize;
        let kappa = 10f64.powf(r.random_range(0.5..5.0));
        let rho = r.random_range(0.1..0.9);
        let threshold = b0(n, kappa, rho);
        for b in 1..n.min(100) {
            let t = TheoryInputs::from_kappa(n, kappa, b).unwrap();
            let ht = h_tilde(&t, rho);
            if ((ht * kappa) - 1.0).abs() < 1e-9 || ((b as f64) - threshold).abs() < 1e-9 {
                continue;
            }
            assert_eq!(ht < 1.0 / kappa, (b as f64) < threshold);
        }
    }
}

/// `b · m*(b)` over the interior batch sizes, in increasing `b`.
fn interior_workloads(n: usize, kappa: f64, rho: f64) -> Vec<f64> {
    (1..=n)
        .map(|b| TheoryInputs::from_kappa(n, kappa, b).unwrap())
        .take_while(|t| optimal_params(t, rho).unwrap().regime == Regime::Interior)
        .map(|t| t.batch as f64 * m_star_interior(&t, rho))
        .collect()
}

#[test]
fn batch_workload_non_increasing_when_kappa_scales_with_n() {
    let mut r = common::rng(55);
    for _ in 0..50 {
        let n = 10f64.powf(r.random_range(2.0..6.0)) as usize;
        let kappa = n as f64 * 10f64.powf(r.random_range(-1.0..1.0));
        let rho = r.random_range(0.05..0.95);
        let w = interior_workloads(n, kappa, rho);
        assert!(!w.is_empty());
        assert!(
            w.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9)),
            "n={n} kappa={kappa} rho={rho}"
        );
        assert!(w.iter().all(|&v| v <= w[0] * (1.0 + 1e-9)));
    }
}

#[test]
fn batch_workload_can_grow_when_kappa_is_small_relative_to_n() {
    let w = interior_workloads(1_000_000, 10.0, 0.5);
    assert!(w.len() > 2);
    assert!(w[1] > w[0]);
}

#[test]
fn recipe_reaches_inverse_e_and_predicts_work() {
    let mut r = common::rng(56);
    for _ in 0..50 {
        let n = 10f64.powf(r.random_range(3.0..7.0)) as usize;
        let kappa = 10f64.powf(r.random_range(1.0..5.0));
        let eps = 10f64.powf(r.random_range(-10.0..-1.0));
        for b in [1usize, 2, 5, 13, 29] {
            let t = TheoryInputs::from_kappa(n, kappa, b).unwrap();
            let rec = corollary_recipe(&t, eps).unwrap();
            let rho = rate_rho(&t, rec.step_size, rec.inner_steps as f64).unwrap();
            assert!(rho <= 1.0 / E + 1e-6);
            assert_eq!(rec.epochs, (1.0 / eps).ln().ceil() as u64);
            assert_eq!(
                rec.total_work_units,
                ((n as u64 + 2 * b as u64 * rec.inner_steps) * rec.epochs) as f64
            );
        }
    }
}

#[test]
fn variance_lemma_holds_on_random_families() {
    let mut r = common::rng(57);
    for _ in 0..200 {
        let n = r.random_range(1..=8);
        let d = r.random_range(1..=4);
        let tau = r.random_range(1..=n);
        let xi: Vec<Vec<f64>> = (0..n).map(|_| common::random_vec(&mut r, d, 3.0)).collect();
        let (lhs, rhs) = variance_lemma_check(&xi, tau).unwrap();
        assert!(lhs <= rhs + 1e-12);
        assert!(lhs >= 0.0);
    }
}
