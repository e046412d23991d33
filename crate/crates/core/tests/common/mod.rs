#![allow(dead_code)]

use ms2gd::{CompositeProblem, CsrMatrix, Dataset, Loss, RegKind, Regularizer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sparse rows with every row nonempty; labels in {-1, +1} for the
/// logistic loss and Gaussian-ish reals otherwise.
pub fn random_problem(n: usize, d: usize, density: f64, loss: Loss, reg: Regularizer, seed: u64) -> CompositeProblem {
    let mut r = rng(seed);
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|_| {
            let mut row = Vec::new();
            for j in 0..d {
                if r.random::<f64>() < density {
                    row.push((j, r.random_range(-1.0..1.0)));
                }
            }
            if row.is_empty() {
                row.push((r.random_range(0..d), 0.7));
            }
            row
        })
        .collect();
    let labels = (0..n)
        .map(|_| match loss {
            Loss::Logistic => {
                if r.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Loss::Squared => r.random_range(-2.0..2.0),
        })
        .collect();
    let features = CsrMatrix::from_rows(d, rows).unwrap();
    let data = Dataset::new(features, labels, "random").unwrap();
    let mu = if reg.kind == RegKind::L2 && reg.lambda > 0.0 {
        None
    } else {
        Some(1e-2)
    };
    CompositeProblem::new(data, loss, reg, mu).unwrap()
}

pub fn random_vec(r: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| r.random_range(-scale..scale)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
