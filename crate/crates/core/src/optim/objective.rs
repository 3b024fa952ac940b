//! Objectives the optimizers minimise over a box.

use crate::bench::{BenchmarkFn, Bounds, TestFunction};
use crate::error::{Error, Result};
use crate::nn::Tensor2;
use crate::surrogate::SurrogateModel;

/// A scalar objective over raw design vectors inside `bounds()`.
/// Evaluation is batched: one row per candidate.
pub trait Objective {
    fn bounds(&self) -> &Bounds;

    fn values(&self, x: &Tensor2) -> Result<Vec<f64>>;

    /// Values and gradients with respect to the raw coordinates.
    fn values_and_grads(&self, x: &Tensor2) -> Result<(Vec<f64>, Tensor2)>;

    fn dim(&self) -> usize {
        self.bounds().dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.values(&Tensor2::from_vec(1, x.len(), x.to_vec())?)?[0])
    }
}

/// `sign(v)` with the kink convention `sign(0) = 0`.
#[inline]
fn kink_sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Distance between the surrogate's prediction and a target, measured in
/// standardised output units: `|ŷ_s − y_t_s|`.
#[derive(Debug, Clone)]
pub struct OptProblem<'a> {
    pub surrogate: &'a SurrogateModel,
    pub y_target: f64,
    bounds: Bounds,
}

impl<'a> OptProblem<'a> {
    pub fn new(surrogate: &'a SurrogateModel, y_target: f64) -> Result<Self> {
        if !y_target.is_finite() {
            return Err(Error::NonFinite("optimization target".into()));
        }
        Ok(Self {
            surrogate,
            y_target,
            bounds: surrogate.scalers.bounds(),
        })
    }

    fn target_scaled(&self) -> f64 {
        self.surrogate.scalers.scale_y(self.y_target)
    }
}

impl Objective for OptProblem<'_> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn values(&self, x: &Tensor2) -> Result<Vec<f64>> {
        let u = self.surrogate.scalers.scale_x(x)?;
        let t = self.target_scaled();
        Ok(self
            .surrogate
            .predict_scaled(&u)?
            .into_iter()
            .map(|s| (s - t).abs())
            .collect())
    }

    fn values_and_grads(&self, x: &Tensor2) -> Result<(Vec<f64>, Tensor2)> {
        let u = self.surrogate.scalers.scale_x(x)?;
        let t = self.target_scaled();
        let (s, mut g) = self.surrogate.gradient_scaled(&u)?;
        let mut vals = Vec::with_capacity(s.len());
        for (r, &sr) in s.iter().enumerate() {
            let sign = kink_sign(sr - t);
            vals.push((sr - t).abs());
            for (j, gj) in g.row_mut(r).iter_mut().enumerate() {
                *gj *= sign / self.bounds.width(j);
            }
        }
        Ok((vals, g))
    }
}

/// `|f(x) − target|` on the analytic benchmark itself, bypassing any
/// surrogate.
#[derive(Debug, Clone)]
pub struct FunctionTarget {
    pub function: BenchmarkFn,
    pub target: f64,
    bounds: Bounds,
}

impl FunctionTarget {
    pub fn new(function: BenchmarkFn, target: f64) -> Self {
        Self {
            function,
            target,
            bounds: function.bounds(),
        }
    }
}

impl Objective for FunctionTarget {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn values(&self, x: &Tensor2) -> Result<Vec<f64>> {
        x.iter_rows()
            .map(|r| Ok((self.function.eval(r)? - self.target).abs()))
            .collect()
    }

    fn values_and_grads(&self, x: &Tensor2) -> Result<(Vec<f64>, Tensor2)> {
        let mut g = Tensor2::zeros(x.rows(), x.cols());
        let mut vals = Vec::with_capacity(x.rows());
        for (r, row) in x.iter_rows().enumerate() {
            let diff = self.function.eval(row)? - self.target;
            let sign = kink_sign(diff);
            vals.push(diff.abs());
            for (gj, dj) in g.row_mut(r).iter_mut().zip(self.function.gradient(row)?) {
                *gj = sign * dj;
            }
        }
        Ok((vals, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_hit_has_zero_value_and_gradient() {
        let f = BenchmarkFn::rosenbrock(2).unwrap();
        let obj = FunctionTarget::new(f, 1.0);
        let (v, g) = obj
            .values_and_grads(&Tensor2::from_rows(&[vec![0.0, 0.0]]).unwrap())
            .unwrap();
        assert_eq!(v, vec![0.0]);
        assert_eq!(g.as_slice(), &[0.0, 0.0]);
    }
}
