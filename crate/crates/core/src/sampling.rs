//! Random allocations and history subsampling.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot sample {k} of {len} entries")]
pub struct SampleSizeError {
    pub k: usize,
    pub len: usize,
}

/// Uniform point on `{x >= 0, sum x = budget}` via normalized exponential
/// spacings.
pub fn simplex_point<R: Rng + ?Sized>(rng: &mut R, dims: usize, budget: f64) -> Vec<f64> {
    assert!(dims > 0);
    if dims == 1 {
        return vec![budget];
    }
    let draws: Vec<f64> = (0..dims).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total <= 0.0 {
        // every draw was exactly zero; practically unreachable
        return vec![budget / dims as f64; dims];
    }
    draws.into_iter().map(|d| d / total * budget).collect()
}

/// `k` distinct entries chosen uniformly without replacement, returned in
/// their original order.
pub fn sample_subset<'a, T, R: Rng + ?Sized>(
    items: &'a [T],
    k: usize,
    rng: &mut R,
) -> Result<Vec<&'a T>, SampleSizeError> {
    if k == 0 || k > items.len() {
        return Err(SampleSizeError {
            k,
            len: items.len(),
        });
    }
    let mut picked = index::sample(rng, items.len(), k).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| &items[i]).collect())
}
