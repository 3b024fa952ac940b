//! Mixed observed/augmented datasets for the data-composition study.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{build_dataset, Dataset, Provenance};
use super::functions::TestFunction;
use crate::error::{Error, Result};
use crate::nn::Tensor2;
use crate::numfmt::derive_seed;

pub const POOL_SIZE: usize = 300;
pub const TOTAL_SIZES: [usize; 6] = [300, 500, 1000, 4000, 7000, 10000];
pub const REAL_RATIOS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataCompositionSpec {
    pub total_size: usize,
    pub real_ratio: f64,
    pub pool_seed: u64,
    pub draw_seed: u64,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    /// Permit fresh LHS rows when more observed rows are requested than the
    /// pool holds.
    #[serde(default = "default_top_up")]
    pub allow_top_up: bool,
}

fn default_pool_size() -> usize {
    POOL_SIZE
}

fn default_top_up() -> bool {
    true
}

impl DataCompositionSpec {
    pub fn new(total_size: usize, real_ratio: f64, pool_seed: u64, draw_seed: u64) -> Self {
        Self {
            total_size,
            real_ratio,
            pool_seed,
            draw_seed,
            pool_size: POOL_SIZE,
            allow_top_up: true,
        }
    }

    pub fn observed_count(&self) -> usize {
        (self.total_size as f64 * self.real_ratio).round() as usize
    }
}

/// The fixed observation pool for a benchmark.
pub fn observation_pool(f: &dyn TestFunction, spec: &DataCompositionSpec) -> Result<Dataset> {
    build_dataset(f, spec.pool_size, spec.pool_seed)
}

/// Builds a dataset of `total_size` rows, `round(n·η)` of them observed.
///
/// Observed rows are drawn without replacement from the pool (kept in pool
/// order), topped up with fresh LHS rows when the pool is too small.
/// Augmented rows take each coordinate independently from that dimension's
/// pool values, cycling through a fresh shuffle whenever a column is used
/// up, so joint structure is lost while marginals are kept. With η = 0 the
/// augmented coordinates are instead uniform between the pool's
/// per-dimension minimum and maximum. Every label comes from `f`.
pub fn compose_dataset(f: &dyn TestFunction, spec: &DataCompositionSpec) -> Result<Dataset> {
    if spec.total_size == 0 {
        return Err(Error::Input("total size must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&spec.real_ratio) {
        return Err(Error::Input(format!(
            "real ratio {} outside [0, 1]",
            spec.real_ratio
        )));
    }
    let pool = observation_pool(f, spec)?;
    let d = f.dim();
    let n_obs = spec.observed_count();
    let n_aug = spec.total_size - n_obs;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.draw_seed);

    let mut out = if n_obs <= pool.len() {
        let mut idx = rand::seq::index::sample(&mut rng, pool.len(), n_obs).into_vec();
        idx.sort_unstable();
        pool.subset(&idx)
    } else {
        if !spec.allow_top_up {
            return Err(Error::Input(format!(
                "{n_obs} observed rows requested but the pool holds {}",
                pool.len()
            )));
        }
        let mut ds = pool.clone();
        let extra = build_dataset(
            f,
            n_obs - pool.len(),
            derive_seed(spec.draw_seed, &["top-up"]),
        )?;
        ds.extend(&extra)?;
        ds
    };

    if n_aug > 0 {
        let mut x = Tensor2::zeros(n_aug, d);
        if n_obs == 0 {
            for j in 0..d {
                let col: Vec<f64> = pool.x.iter_rows().map(|r| r[j]).collect();
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for r in 0..n_aug {
                    let v = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                    x.set(r, j, v);
                }
            }
        } else {
            for j in 0..d {
                let col: Vec<f64> = pool.x.iter_rows().map(|r| r[j]).collect();
                let mut deck = col.clone();
                let mut at = deck.len();
                for r in 0..n_aug {
                    if at == deck.len() {
                        deck.copy_from_slice(&col);
                        deck.shuffle(&mut rng);
                        at = 0;
                    }
                    x.set(r, j, deck[at]);
                    at += 1;
                }
            }
        }
        let aug = Dataset::label(f, x, Provenance::Augmented)?;
        if out.is_empty() {
            out = aug;
        } else {
            out.extend(&aug)?;
        }
    }
    Ok(out)
}
