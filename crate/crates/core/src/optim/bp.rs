//! Projected Adam descent on the design through a differentiable objective.

use super::objective::Objective;
use super::params::{Method, OptParams, OptResult};
use crate::bench::lhs_sample;
use crate::error::Result;
use crate::nn::{AdamState, Tensor2};
use crate::numfmt::derive_seed;

/// All starts advance together so each iteration costs one batched
/// gradient evaluation. Every start has its own Adam state on unit-box
/// coordinates and is projected back onto the box after each update. A
/// start stops once its objective drops below the tolerance. The best
/// start's final point is returned; `cost` is its number of updates.
pub fn bp_optimize(obj: &dyn Objective, target: f64, params: &OptParams) -> Result<OptResult> {
    params.validate()?;
    let bounds = obj.bounds().clone();
    let d = bounds.dim();
    let n = params.num_initial;
    let x0 = lhs_sample(n, &bounds, derive_seed(params.rng_seed, &["bp", "init"]));
    let mut u = Tensor2::zeros(n, d);
    for r in 0..n {
        for j in 0..d {
            u.set(r, j, (x0.get(r, j) - bounds.lower[j]) / bounds.width(j));
        }
    }
    let to_raw = |u: &Tensor2| {
        let mut x = u.clone();
        for r in 0..u.rows() {
            for (j, v) in x.row_mut(r).iter_mut().enumerate() {
                *v = bounds.lower[j] + *v * bounds.width(j);
            }
        }
        x
    };
    let mut adams: Vec<AdamState> = (0..n)
        .map(|_| AdamState::new(params.bp.step_size, &[d]))
        .collect();
    let mut updates = vec![0usize; n];
    let mut active = vec![true; n];
    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); n];

    let (mut vals, mut grads) = obj.values_and_grads(&to_raw(&u))?;
    for _ in 0..params.max_iterations {
        for r in 0..n {
            if active[r] {
                traces[r].push(vals[r]);
                if !(vals[r] >= params.tolerance) {
                    active[r] = false;
                }
            }
        }
        if !active.iter().any(|&a| a) {
            break;
        }
        for r in 0..n {
            if !active[r] {
                continue;
            }
            let g: Vec<f64> = grads
                .row(r)
                .iter()
                .enumerate()
                .map(|(j, gj)| gj * bounds.width(j))
                .collect();
            let row = u.row_mut(r);
            adams[r].step(&mut [&mut *row], &[&g])?;
            row.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
            updates[r] += 1;
        }
        (vals, grads) = obj.values_and_grads(&to_raw(&u))?;
    }
    for r in 0..n {
        if active[r] {
            traces[r].push(vals[r]);
        }
    }

    let mut best = 0;
    for r in 1..n {
        if vals[r] < vals[best] || (vals[best].is_nan() && !vals[r].is_nan()) {
            best = r;
        }
    }
    Ok(OptResult {
        method: Method::Bp,
        target,
        x_star: to_raw(&u).row(best).to_vec(),
        objective: vals[best],
        cost: updates[best],
        trace: std::mem::take(&mut traces[best]),
    })
}
