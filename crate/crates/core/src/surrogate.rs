//! Deep surrogate (forward network) for one benchmark cell.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::{split, BenchmarkFn, Dataset, ScalerPair, TestFunction};
use crate::error::{Error, Result};
use crate::nn::{
    train, Activation, History, MlpSpec, Mse, NetDocument, NeuralNet, Samples, Tensor2,
    TrainConfig,
};
use crate::numfmt::derive_seed;

pub const SURROGATE_HIDDEN: [usize; 3] = [256, 256, 128];
pub const SURROGATE_DROPOUT: f64 = 0.2;
pub const TRAIN_FRACTION: f64 = 0.9;
pub const SURROGATE_FORMAT_VERSION: u32 = 1;

/// Trained forward model `x → y`. The network works on min-max scaled
/// inputs and standardised outputs; the public methods take and return raw
/// units unless their name says otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub net: NeuralNet,
    pub scalers: ScalerPair,
    pub benchmark: BenchmarkFn,
    pub history: History,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateMetrics {
    pub rmse_raw: f64,
    pub rmse_scaled: f64,
    pub r2: f64,
}

pub fn surrogate_spec(dim: usize) -> MlpSpec {
    MlpSpec {
        inputs: dim,
        hidden: SURROGATE_HIDDEN.to_vec(),
        outputs: 1,
        hidden_activation: Activation::Elu,
        output_activation: Activation::Identity,
        dropout_rate: SURROGATE_DROPOUT,
    }
}

/// Splits `ds` 9:1, fits scalers on the training part, and trains the
/// surrogate with MSE and early stopping. `cfg.rng_seed` drives the split,
/// the initial weights and the batch order.
pub fn train_surrogate(ds: &Dataset, f: BenchmarkFn, cfg: &TrainConfig) -> Result<SurrogateModel> {
    if ds.dim() != f.dim() {
        return Err(Error::Dimension(format!(
            "dataset has {} columns but {} is {}-dimensional",
            ds.dim(),
            f.name(),
            f.dim()
        )));
    }
    let bounds = f.bounds();
    if let Some(row) = ds.x.iter_rows().find(|r| !bounds.contains(r)) {
        return Err(Error::Input(format!("design {row:?} lies outside the bounds")));
    }
    let (tr, va) = split(ds, TRAIN_FRACTION, derive_seed(cfg.rng_seed, &["split"]))?;
    let scalers = ScalerPair::fit(&tr, &bounds)?;
    let to_samples = |d: &Dataset| -> Result<Samples> {
        Samples::new(scalers.scale_x(&d.x)?, scalers.scale_y_column(&d.y))
    };
    let (tr_s, va_s) = (to_samples(&tr)?, to_samples(&va)?);
    let mut net = NeuralNet::mlp(&surrogate_spec(f.dim()), derive_seed(cfg.rng_seed, &["init"]))?;
    let history = train(&mut net, &tr_s, &va_s, cfg, &Mse)?;
    Ok(SurrogateModel {
        net,
        scalers,
        benchmark: f,
        history,
    })
}

impl SurrogateModel {
    pub fn dim(&self) -> usize {
        self.benchmark.dim()
    }

    fn check_width(&self, x: &Tensor2) -> Result<()> {
        if x.cols() != self.dim() {
            return Err(Error::Dimension(format!(
                "surrogate expects {} columns, got {}",
                self.dim(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// Standardised predictions for min-max scaled inputs.
    pub fn predict_scaled(&self, u: &Tensor2) -> Result<Vec<f64>> {
        self.check_width(u)?;
        Ok(self.net.forward(u)?.into_vec())
    }

    pub fn predict(&self, x: &Tensor2) -> Result<Vec<f64>> {
        let u = self.scalers.scale_x(x)?;
        Ok(self
            .predict_scaled(&u)?
            .into_iter()
            .map(|s| self.scalers.unscale_y(s))
            .collect())
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<f64> {
        let t = Tensor2::from_vec(1, x.len(), x.to_vec())?;
        Ok(self.predict(&t)?[0])
    }

    /// Standardised predictions and their gradients with respect to the
    /// scaled inputs, one row per input row.
    pub fn gradient_scaled(&self, u: &Tensor2) -> Result<(Vec<f64>, Tensor2)> {
        self.check_width(u)?;
        let ones = Tensor2::filled(u.rows(), 1, 1.0);
        let (out, grad) = self.net.input_gradient(u, &ones)?;
        Ok((out.into_vec(), grad))
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<SurrogateMetrics> {
        evaluate_surrogate(self, test)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SurrogateDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<SurrogateDocument>(s)?.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Serialized surrogate: the network document plus scalers, benchmark and
/// training history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateDocument {
    format_version: u32,
    benchmark: BenchmarkFn,
    scalers: ScalerPair,
    net: NetDocument,
    history: History,
}

impl From<&SurrogateModel> for SurrogateDocument {
    fn from(m: &SurrogateModel) -> Self {
        Self {
            format_version: SURROGATE_FORMAT_VERSION,
            benchmark: m.benchmark,
            scalers: m.scalers.clone(),
            net: NetDocument::from(&m.net),
            history: m.history.clone(),
        }
    }
}

impl TryFrom<SurrogateDocument> for SurrogateModel {
    type Error = Error;

    fn try_from(doc: SurrogateDocument) -> Result<Self> {
        if doc.format_version != SURROGATE_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: doc.format_version,
                expected: SURROGATE_FORMAT_VERSION,
            });
        }
        let net = NeuralNet::try_from(doc.net)?;
        if net.input_width() != doc.benchmark.dim() || net.output_width() != 1 {
            return Err(Error::Dimension(
                "stored network does not match the benchmark".into(),
            ));
        }
        if doc.scalers.dim() != doc.benchmark.dim() {
            return Err(Error::Dimension(
                "stored scalers do not match the benchmark".into(),
            ));
        }
        Ok(Self {
            net,
            scalers: doc.scalers,
            benchmark: doc.benchmark,
            history: doc.history,
        })
    }
}

/// Raw and standardised RMSE plus the coefficient of determination on
/// `test`.
pub fn evaluate_surrogate(m: &SurrogateModel, test: &Dataset) -> Result<SurrogateMetrics> {
    if test.is_empty() {
        return Err(Error::Input("test set is empty".into()));
    }
    let pred = m.predict(&test.x)?;
    Ok(metrics(&test.y, &pred, m.scalers.y_std))
}

pub(crate) fn metrics(y: &[f64], pred: &[f64], y_std: f64) -> SurrogateMetrics {
    let n = y.len() as f64;
    let sse: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    let mean = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|a| (a - mean) * (a - mean)).sum();
    let rmse_raw = (sse / n).sqrt();
    SurrogateMetrics {
        rmse_raw,
        rmse_scaled: rmse_raw / y_std,
        r2: if sst > 0.0 { 1.0 - sse / sst } else { f64::NAN },
    }
}
