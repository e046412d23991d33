//! Random stream and uniform mini-batch sampling.
//!
//! Every solver run owns one [`SolverRng`]. Draw accounting, which the
//! dense and lazy mS2GD paths rely on to share a stream:
//!
//! * [`draw_inner_steps`] makes one `random_range` call.
//! * [`sample_batch`] makes exactly `b` `random_range` calls when `b < n`
//!   (Floyd's subset algorithm) and none when `b = n`.
//! * [`draw_index`] makes one `random_range` call.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type SolverRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SolverRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random subset of `{0, …, n-1}` of size `b`, sorted ascending.
///
/// Each of the `C(n, b)` subsets has equal probability.
pub fn sample_batch<R: Rng + ?Sized>(rng: &mut R, n: usize, b: usize) -> Result<Vec<usize>> {
    if b == 0 || b > n {
        return Err(Error::InvalidBatch(format!(
            "batch size must satisfy 1 <= b <= n, got b = {b}, n = {n}"
        )));
    }
    if b == n {
        return Ok((0..n).collect());
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(b);
    for j in (n - b)..n {
        let t = rng.random_range(0..=j);
        let value = match chosen.binary_search(&t) {
            Ok(_) => j,
            Err(_) => t,
        };
        // j exceeds every element chosen so far, so it always lands at the end.
        let pos = chosen.binary_search(&value).unwrap_err();
        chosen.insert(pos, value);
    }
    Ok(chosen)
}

/// Inner-loop length `t_k`, uniform on `{1, …, m}`.
pub fn draw_inner_steps<R: Rng + ?Sized>(rng: &mut R, m: usize) -> usize {
    rng.random_range(1..=m)
}

/// Single index uniform on `{0, …, n-1}`.
#[inline]
pub fn draw_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n)
}
