//! Generational genetic algorithm over a box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::objective::Objective;
use super::params::{Method, OptParams, OptResult};
use crate::bench::lhs_sample;
use crate::error::{Error, Result};
use crate::nn::Tensor2;
use crate::numfmt::derive_seed;

/// Population of `num_initial` LHS designs, elitism of one, tournament
/// selection, uniform crossover and clipped Gaussian mutation. The initial
/// population counts as the first generation; `cost` is the number of
/// generations evaluated.
pub fn ga_optimize(obj: &dyn Objective, target: f64, params: &OptParams) -> Result<OptResult> {
    params.validate()?;
    let bounds = obj.bounds().clone();
    let d = bounds.dim();
    let n = params.num_initial;
    let gp = &params.ga;
    let mutation_rate = gp.mutation_rate.unwrap_or(1.0 / d as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.rng_seed, &["ga"]));
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let mut pop = lhs_sample(n, &bounds, derive_seed(params.rng_seed, &["ga", "init"]));
    let mut fit = checked(obj.values(&pop)?)?;
    let mut generations = 1;
    let (mut best_x, mut best_f) = best_of(&pop, &fit);
    let mut trace = vec![best_f];

    let tournament = |fit: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let mut pick = rng.random_range(0..fit.len());
        for _ in 1..gp.tournament_size {
            let c = rng.random_range(0..fit.len());
            if fit[c] < fit[pick] {
                pick = c;
            }
        }
        pick
    };

    while generations < params.max_iterations && best_f >= params.tolerance {
        let mut next = Tensor2::zeros(n, d);
        next.row_mut(0).copy_from_slice(&best_x);
        let mut filled = 1;
        while filled < n {
            let a = pop.row(tournament(&fit, &mut rng)).to_vec();
            let b = pop.row(tournament(&fit, &mut rng)).to_vec();
            let (mut c1, mut c2) = (a.clone(), b.clone());
            if rng.random::<f64>() < gp.crossover_rate {
                for j in 0..d {
                    if rng.random::<bool>() {
                        c1[j] = b[j];
                        c2[j] = a[j];
                    }
                }
            }
            for child in [c1, c2] {
                if filled == n {
                    break;
                }
                let row = next.row_mut(filled);
                for j in 0..d {
                    let mut v = child[j];
                    if rng.random::<f64>() < mutation_rate {
                        v += gp.mutation_sigma * bounds.width(j) * unit.sample(&mut rng);
                    }
                    row[j] = v.clamp(bounds.lower[j], bounds.upper[j]);
                }
                filled += 1;
            }
        }
        pop = next;
        fit = checked(obj.values(&pop)?)?;
        generations += 1;
        let (x, f) = best_of(&pop, &fit);
        if f < best_f {
            best_x = x;
            best_f = f;
        }
        trace.push(best_f);
    }

    Ok(OptResult {
        method: Method::Ga,
        target,
        x_star: best_x,
        objective: best_f,
        cost: generations,
        trace,
    })
}

/// A non-finite fitness would poison selection; rank it last instead.
fn checked(mut fit: Vec<f64>) -> Result<Vec<f64>> {
    for v in &mut fit {
        if v.is_nan() {
            *v = f64::INFINITY;
        }
    }
    if fit.iter().all(|v| v.is_infinite()) {
        return Err(Error::NonFinite("every GA candidate evaluated to a non-finite value".into()));
    }
    Ok(fit)
}

fn best_of(pop: &Tensor2, fit: &[f64]) -> (Vec<f64>, f64) {
    let mut i = 0;
    for (k, &v) in fit.iter().enumerate() {
        if v < fit[i] {
            i = k;
        }
    }
    (pop.row(i).to_vec(), fit[i])
}
