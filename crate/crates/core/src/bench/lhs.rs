use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::functions::Bounds;
use crate::nn::Tensor2;

/// Latin hypercube sample of `n` points in `bounds`.
///
/// Each dimension is cut into `n` equal strata; every stratum receives
/// exactly one point, placed uniformly inside it, and the stratum order is an
/// independent random permutation per dimension.
pub fn lhs_sample(n: usize, bounds: &Bounds, seed: u64) -> Tensor2 {
    let d = bounds.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Tensor2::zeros(n, d);
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(&mut rng);
        let (lo, w) = (bounds.lower[j], bounds.width(j));
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            let v = lo + w * (s as f64 + u) / n as f64;
            // Guard against rounding pushing the top stratum onto `upper`'s
            // far side.
            out.set(i, j, v.min(bounds.upper[j]));
        }
    }
    out
}

/// Stratum index (0..n) of `v` in dimension `j`.
pub fn stratum_of(v: f64, j: usize, n: usize, bounds: &Bounds) -> usize {
    let t = (v - bounds.lower[j]) / bounds.width(j);
    ((t * n as f64).floor() as usize).min(n - 1)
}
