//! Small numeric utilities: compensated reductions, log-sum-exp, and the
//! deterministic seeding scheme used by every sampler in the crate.
//!
//! All randomness flows through counter-based ChaCha streams keyed by
//! explicit `u64` seeds. Derived seeds (per operation, per conditioning
//! point) are produced with a splitmix64 mixer so that independent parts of
//! a computation never share a stream by accident and results are
//! reproducible for any execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sum with fixed pairwise association. Error grows like O(log n) rather
/// than O(n), and the result does not depend on any runtime partitioning.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and unbiased sample variance in one pass pair.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    (m, pairwise_sum(&sq) / (xs.len() - 1) as f64)
}

/// Unbiased sample covariance of two equally long slices.
pub fn sample_cov(xs: &[f64], ys: &[f64], mx: f64, my: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return 0.0;
    }
    let prod: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .collect();
    pairwise_sum(&prod) / (xs.len() - 1) as f64
}

/// log(sum_i exp(x_i)) with the usual max shift. Returns -inf for an empty
/// slice or when every entry is -inf; +inf inputs propagate to +inf.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let shifted: Vec<f64> = xs.iter().map(|&x| (x - m).exp()).collect();
    m + pairwise_sum(&shifted).ln()
}

/// splitmix64 finalizer; bijective on u64.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive an independent child seed from a parent seed and a stream tag.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Deterministic 64-bit digest of a float vector, used to key the
/// conditional sampling stream of a profile evaluation to its location.
pub fn hash_f64_slice(xs: &[f64]) -> u64 {
    let mut h: u64 = 0x243f6a8885a308d3;
    for &x in xs {
        h = splitmix64(h ^ x.to_bits());
    }
    h
}

/// Counter-based generator for one logical stream.
pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
