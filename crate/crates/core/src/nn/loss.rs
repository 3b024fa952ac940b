//! Loss functions used during training.

use super::tensor::Tensor2;
use crate::error::{Error, Result};

fn same_shape(a: &Tensor2, b: &Tensor2) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    if a.rows() == 0 {
        return Err(Error::Input("loss of an empty batch".into()));
    }
    Ok(())
}

/// Mean squared error over every entry.
pub fn mse(y_true: &Tensor2, y_pred: &Tensor2) -> Result<f64> {
    same_shape(y_true, y_pred)?;
    let n = y_true.as_slice().len() as f64;
    Ok(y_true
        .as_slice()
        .iter()
        .zip(y_pred.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// MSE and its gradient with respect to `y_pred`.
pub fn mse_with_grad(y_true: &Tensor2, y_pred: &Tensor2) -> Result<(f64, Tensor2)> {
    let loss = mse(y_true, y_pred)?;
    let n = y_true.as_slice().len() as f64;
    let mut grad = y_pred.clone();
    grad.as_mut_slice()
        .iter_mut()
        .zip(y_true.as_slice())
        .for_each(|(g, t)| *g = 2.0 * (*g - t) / n);
    Ok((loss, grad))
}

/// Probabilities are clamped this far from 0 and 1 inside logarithms.
const PROB_FLOOR: f64 = 1e-12;

/// Binary cross-entropy of probabilities `p` against labels in {0, 1},
/// averaged over entries, with its gradient with respect to `p`.
pub fn bce_with_grad(p: &Tensor2, label: f64) -> Result<(f64, Tensor2)> {
    if p.rows() == 0 {
        return Err(Error::Input("loss of an empty batch".into()));
    }
    let n = p.as_slice().len() as f64;
    let mut loss = 0.0;
    let mut grad = p.clone();
    for g in grad.as_mut_slice() {
        let q = g.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        loss -= label * q.ln() + (1.0 - label) * (1.0 - q).ln();
        *g = (-(label / q) + (1.0 - label) / (1.0 - q)) / n;
    }
    Ok((loss / n, grad))
}

/// Non-saturating generator loss `−mean(log p)` and its gradient.
pub fn neg_log_with_grad(p: &Tensor2) -> Result<(f64, Tensor2)> {
    bce_with_grad(p, 1.0)
}

/// Loss used by the training loop: maps a network output batch and a target
/// batch to a scalar and the gradient with respect to the output.
pub trait Loss {
    fn value(&self, output: &Tensor2, target: &Tensor2) -> Result<f64>;

    fn value_and_grad(&self, output: &Tensor2, target: &Tensor2) -> Result<(f64, Tensor2)>;
}

/// Plain mean squared error between output and target.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mse;

impl Loss for Mse {
    fn value(&self, output: &Tensor2, target: &Tensor2) -> Result<f64> {
        mse(target, output)
    }

    fn value_and_grad(&self, output: &Tensor2, target: &Tensor2) -> Result<(f64, Tensor2)> {
        mse_with_grad(target, output)
    }
}
