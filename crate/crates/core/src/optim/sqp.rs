//! Multi-start SQP for box constraints: damped BFGS curvature, a
//! box-constrained quadratic subproblem and Armijo backtracking.
//!
//! Iterates live on unit-box coordinates `u = (x − lb) / (ub − lb)` so the
//! initial identity Hessian is reasonable in every dimension.

use super::objective::Objective;
use super::params::{Method, OptParams, OptResult, SqpParams};
use crate::bench::{lhs_sample, Bounds};
use crate::error::Result;
use crate::nn::Tensor2;
use crate::numfmt::derive_seed;

/// Outcome of one SQP start.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalRun {
    pub x: Vec<f64>,
    pub value: f64,
    pub accepted: usize,
    /// Objective at the start followed by the value after each accepted
    /// step.
    pub trace: Vec<f64>,
    /// Every accepted iterate in raw coordinates, the start included.
    pub iterates: Vec<Vec<f64>>,
}

struct UnitView<'a> {
    obj: &'a dyn Objective,
    bounds: &'a Bounds,
}

impl UnitView<'_> {
    fn to_raw(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(j, &v)| self.bounds.lower[j] + v * self.bounds.width(j))
            .collect()
    }

    fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| ((v - self.bounds.lower[j]) / self.bounds.width(j)).clamp(0.0, 1.0))
            .collect()
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        self.obj.value(&self.to_raw(u))
    }

    fn value_and_grad(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        let x = self.to_raw(u);
        let (v, g) = self
            .obj
            .values_and_grads(&Tensor2::from_vec(1, x.len(), x)?)?;
        let g = g
            .row(0)
            .iter()
            .enumerate()
            .map(|(j, gj)| gj * self.bounds.width(j))
            .collect();
        Ok((v[0], g))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// Norm of the projected gradient step `P(u − g) − u` on the unit box.
fn projected_gradient_norm(u: &[f64], g: &[f64]) -> f64 {
    u.iter()
        .zip(g)
        .map(|(&ui, &gi)| {
            let p = (ui - gi).clamp(0.0, 1.0) - ui;
            p * p
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, PartialEq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// Minimises `½dᵀBd + gᵀd` over `lo ≤ d ≤ hi` for symmetric positive
/// definite `B` (row-major `n × n`) with `lo ≤ 0 ≤ hi`.
///
/// Conjugate gradients run on the free variables; a variable that a CG step
/// would push through its bound is fixed there and CG restarts. Once CG
/// converges, the fixed variable whose multiplier has the wrong sign the
/// most is released, until none remain.
pub fn box_qp(b: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut d = vec![0.0; n];
    let mut state = vec![Bound::Free; n];
    let tol = 1e-12 * (1.0 + norm(g));

    'outer: for _ in 0..(10 * n + 10) {
        let bd = matvec(b, &d);
        let mut r: Vec<f64> = (0..n)
            .map(|i| if state[i] == Bound::Free { bd[i] + g[i] } else { 0.0 })
            .collect();
        let mut p: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut rr = dot(&r, &r);
        for _ in 0..=n {
            if rr.sqrt() <= tol {
                break;
            }
            let bp = matvec(b, &p);
            let curv = dot(&p, &bp);
            if !(curv > 0.0) {
                break;
            }
            let alpha = rr / curv;
            let mut amax = f64::INFINITY;
            let mut hit = None;
            for i in 0..n {
                if state[i] != Bound::Free || p[i] == 0.0 {
                    continue;
                }
                let (lim, side) = if p[i] > 0.0 {
                    ((hi[i] - d[i]) / p[i], Bound::Upper)
                } else {
                    ((lo[i] - d[i]) / p[i], Bound::Lower)
                };
                if lim < amax {
                    amax = lim.max(0.0);
                    hit = Some((i, side));
                }
            }
            if alpha >= amax {
                for i in 0..n {
                    if state[i] == Bound::Free {
                        d[i] = (d[i] + amax * p[i]).clamp(lo[i], hi[i]);
                    }
                }
                let (i, side) = hit.expect("finite step limit has a blocking bound");
                state[i] = side;
                d[i] = if side == Bound::Upper { hi[i] } else { lo[i] };
                continue 'outer;
            }
            for i in 0..n {
                if state[i] == Bound::Free {
                    d[i] += alpha * p[i];
                    r[i] += alpha * bp[i];
                }
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            for i in 0..n {
                p[i] = if state[i] == Bound::Free { -r[i] + beta * p[i] } else { 0.0 };
            }
            rr = rr_new;
        }
        let q: Vec<f64> = matvec(b, &d).iter().zip(g).map(|(a, c)| a + c).collect();
        let mut release = None;
        let mut worst = 0.0;
        for i in 0..n {
            let violation = match state[i] {
                Bound::Lower => -q[i],
                Bound::Upper => q[i],
                Bound::Free => 0.0,
            };
            if violation > worst && violation > tol {
                worst = violation;
                release = Some(i);
            }
        }
        match release {
            Some(i) => state[i] = Bound::Free,
            None => break,
        }
    }
    d
}

/// Powell-damped BFGS update of `b` in place.
fn damped_bfgs(b: &mut [f64], s: &[f64], y: &[f64]) {
    let n = s.len();
    let bs = matvec(b, s);
    let sbs = dot(s, &bs);
    let sy = dot(s, y);
    if !(sbs > 1e-300) {
        return;
    }
    let theta = if sy >= 0.2 * sbs {
        1.0
    } else {
        0.8 * sbs / (sbs - sy)
    };
    let r: Vec<f64> = (0..n).map(|i| theta * y[i] + (1.0 - theta) * bs[i]).collect();
    let sr = dot(s, &r);
    if !(sr > 1e-300) {
        return;
    }
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] += -bs[i] * bs[j] / sbs + r[i] * r[j] / sr;
        }
    }
}

/// One SQP run from the raw design `x0` (projected into the box first).
pub fn sqp_local(
    obj: &dyn Objective,
    x0: &[f64],
    max_iterations: usize,
    sp: &SqpParams,
) -> Result<LocalRun> {
    let bounds = obj.bounds().clone();
    let view = UnitView { obj, bounds: &bounds };
    let n = bounds.dim();
    let mut u = view.to_unit(x0);
    let (mut f, mut g) = view.value_and_grad(&u)?;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        b[i * n + i] = 1.0;
    }
    let mut trace = vec![f];
    let mut iterates = vec![view.to_raw(&u)];
    let mut accepted = 0;
    let mut scaled_once = false;

    while accepted < max_iterations
        && f.is_finite()
        && projected_gradient_norm(&u, &g) >= sp.grad_tol
    {
        let lo: Vec<f64> = u.iter().map(|v| -v).collect();
        let hi: Vec<f64> = u.iter().map(|v| 1.0 - v).collect();
        let d = box_qp(&b, &g, &lo, &hi);
        let slope = dot(&g, &d);
        if !(slope < 0.0) {
            break;
        }
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..=sp.max_backtracks {
            let cand: Vec<f64> = u
                .iter()
                .zip(&d)
                .map(|(ui, di)| (ui + alpha * di).clamp(0.0, 1.0))
                .collect();
            let fc = view.value(&cand)?;
            if fc.is_finite() && fc <= f + sp.armijo_c * alpha * slope && fc < f {
                next = Some((cand, fc));
                break;
            }
            alpha *= sp.backtrack;
        }
        let Some((u_new, _)) = next else {
            break;
        };
        let (f_new, g_new) = view.value_and_grad(&u_new)?;
        let s: Vec<f64> = u_new.iter().zip(&u).map(|(a, c)| a - c).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, c)| a - c).collect();
        if !scaled_once {
            // Rescale the identity to the observed curvature before the
            // first update.
            let (sy, yy) = (dot(&s, &y), dot(&y, &y));
            if sy > 0.0 && yy > 0.0 {
                let gamma = yy / sy;
                b.iter_mut().for_each(|v| *v *= gamma);
            }
            scaled_once = true;
        }
        damped_bfgs(&mut b, &s, &y);
        u = u_new;
        f = f_new;
        g = g_new;
        accepted += 1;
        trace.push(f);
        iterates.push(view.to_raw(&u));
        if norm(&s) < sp.step_tol {
            break;
        }
    }

    Ok(LocalRun {
        x: view.to_raw(&u),
        value: f,
        accepted,
        trace,
        iterates,
    })
}

/// Runs [`sqp_local`] from `num_initial` LHS starts and keeps the best.
/// `cost` sums the accepted iterations of every start.
pub fn sqp_optimize(obj: &dyn Objective, target: f64, params: &OptParams) -> Result<OptResult> {
    params.validate()?;
    let starts = lhs_sample(
        params.num_initial,
        obj.bounds(),
        derive_seed(params.rng_seed, &["sqp", "init"]),
    );
    let mut best: Option<LocalRun> = None;
    let mut cost = 0;
    for x0 in starts.iter_rows() {
        let run = sqp_local(obj, x0, params.max_iterations, &params.sqp)?;
        cost += run.accepted;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    Ok(OptResult {
        method: Method::Sqp,
        target,
        x_star: best.x,
        objective: best.value,
        cost,
        trace: best.trace,
    })
}
