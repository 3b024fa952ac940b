use crate::bench::Bounds;
use crate::error::{Error, Result};
use crate::nn::Tensor2;

/// Mean over dimensions of the per-dimension population variance of a
/// sample set given in unit-box coordinates.
pub fn diversity_scaled(u: &Tensor2) -> Result<f64> {
    if u.rows() < 2 {
        return Err(Error::Input("diversity needs at least two samples".into()));
    }
    if u.cols() == 0 {
        return Err(Error::Dimension("samples have no coordinates".into()));
    }
    let n = u.rows() as f64;
    let mut total = 0.0;
    for j in 0..u.cols() {
        let mean = u.iter_rows().map(|r| r[j]).sum::<f64>() / n;
        total += u.iter_rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
    }
    Ok(total / u.cols() as f64)
}

/// [`diversity_scaled`] of raw samples after min-max scaling by `bounds`.
pub fn diversity(x: &Tensor2, bounds: &Bounds) -> Result<f64> {
    if x.cols() != bounds.dim() {
        return Err(Error::Dimension("samples and bounds differ in width".into()));
    }
    let mut u = x.clone();
    for r in 0..u.rows() {
        for (j, v) in u.row_mut(r).iter_mut().enumerate() {
            *v = (*v - bounds.lower[j]) / bounds.width(j);
        }
    }
    diversity_scaled(&u)
}
