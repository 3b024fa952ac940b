//! Tandem network: an inverse net `y → x` trained through a frozen forward
//! surrogate.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::InverseDocument;
use crate::bench::{BenchmarkFn, Bounds, Dataset, TestFunction};
use crate::error::{Error, Result};
use crate::nn::{
    mse, mse_with_grad, train, Activation, History, Loss, MlpSpec, NetDocument, NeuralNet,
    Samples, Tensor2, TrainConfig,
};
use crate::numfmt::derive_seed;
use crate::surrogate::{SurrogateDocument, SurrogateModel};

pub const INVERSE_HIDDEN: [usize; 3] = [128, 256, 256];
pub const TANDEM_FORMAT_VERSION: u32 = 1;

/// Output activations accepted for inverse models.
pub fn check_output_activation(bc: Activation) -> Result<()> {
    match bc {
        Activation::Identity
        | Activation::Sigmoid
        | Activation::TanhBc
        | Activation::TanhBcLiteral => Ok(()),
        other => Err(Error::Config(format!(
            "`{other}` is not an inverse-model output activation"
        ))),
    }
}

pub fn inn_spec(dim: usize, bc: Activation) -> MlpSpec {
    MlpSpec {
        inputs: 1,
        hidden: INVERSE_HIDDEN.to_vec(),
        outputs: dim,
        hidden_activation: Activation::Elu,
        output_activation: bc,
        dropout_rate: 0.0,
    }
}

/// Loss of an inverse net's output `x̂` measured after the frozen forward
/// net: `MSE(y, FNN(x̂))`. The forward net runs without dropout.
pub(crate) struct ThroughForward<'a> {
    pub fnn: &'a NeuralNet,
}

impl Loss for ThroughForward<'_> {
    fn value(&self, output: &Tensor2, target: &Tensor2) -> Result<f64> {
        mse(target, &self.fnn.forward(output)?)
    }

    fn value_and_grad(&self, output: &Tensor2, target: &Tensor2) -> Result<(f64, Tensor2)> {
        let tape = self.fnn.inference_tape(output)?;
        let (l, g) = mse_with_grad(target, tape.output())?;
        Ok((l, self.fnn.backward(&tape, &g, false)?.input))
    }
}

#[derive(Debug)]
pub struct TandemModel {
    pub inn: NeuralNet,
    pub surrogate: SurrogateModel,
    pub bc: Activation,
    pub history: History,
    inferences: AtomicU64,
}

impl Clone for TandemModel {
    fn clone(&self) -> Self {
        Self {
            inn: self.inn.clone(),
            surrogate: self.surrogate.clone(),
            bc: self.bc,
            history: self.history.clone(),
            inferences: AtomicU64::new(self.inference_count()),
        }
    }
}

/// Trains the inverse net on the datasets' labels. Inputs and targets are
/// both the standardised `y`; `cfg.rng_seed` drives initialisation and
/// batch order.
pub fn train_tandem(
    surrogate: &SurrogateModel,
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &TrainConfig,
    bc: Activation,
) -> Result<TandemModel> {
    check_output_activation(bc)?;
    let d = surrogate.dim();
    let mut fnn = surrogate.net.clone();
    fnn.freeze();
    let labels = |ds: &Dataset| -> Result<Samples> {
        let y = surrogate.scalers.scale_y_column(&ds.y);
        Samples::new(y.clone(), y)
    };
    let (tr, va) = (labels(train_set)?, labels(val_set)?);
    let mut inn = NeuralNet::mlp(&inn_spec(d, bc), derive_seed(cfg.rng_seed, &["inn"]))?;
    let history = train(&mut inn, &tr, &va, cfg, &ThroughForward { fnn: &fnn })?;
    Ok(TandemModel {
        inn,
        surrogate: surrogate.clone(),
        bc,
        history,
        inferences: AtomicU64::new(0),
    })
}

impl TandemModel {
    pub fn dim(&self) -> usize {
        self.surrogate.dim()
    }

    pub fn benchmark(&self) -> BenchmarkFn {
        self.surrogate.benchmark
    }

    pub fn bounds(&self) -> Bounds {
        self.surrogate.benchmark.bounds()
    }

    /// Number of inverse predictions made so far.
    pub fn inference_count(&self) -> u64 {
        self.inferences.load(Ordering::Relaxed)
    }

    /// Scaled designs for standardised targets, without counting.
    pub fn predict_scaled(&self, y_scaled: &[f64]) -> Result<Tensor2> {
        self.inn.forward(&Tensor2::column(y_scaled)?)
    }

    /// One raw design per raw target; each target counts as one inference.
    pub fn predict_batch(&self, y_targets: &[f64]) -> Result<Tensor2> {
        let ys: Vec<f64> = y_targets
            .iter()
            .map(|&y| self.surrogate.scalers.scale_y(y))
            .collect();
        let u = self.predict_scaled(&ys)?;
        self.inferences
            .fetch_add(y_targets.len() as u64, Ordering::Relaxed);
        self.surrogate.scalers.unscale_x(&u)
    }

    pub fn predict(&self, y_target: f64) -> Result<Vec<f64>> {
        Ok(self.predict_batch(&[y_target])?.into_vec())
    }

    /// Mean scaled `MSE(y, FNN(INN(y)))` over the labels of `ds`.
    pub fn chain_mse(&self, ds: &Dataset) -> Result<f64> {
        let y = self.surrogate.scalers.scale_y_column(&ds.y);
        ThroughForward {
            fnn: &self.surrogate.net,
        }
        .value(&self.inn.forward(&y)?, &y)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&InverseDocument::Tandem(TandemDocument {
            format_version: TANDEM_FORMAT_VERSION,
            bc: self.bc,
            inn: NetDocument::from(&self.inn),
            surrogate: SurrogateDocument::from(&self.surrogate),
            history: self.history.clone(),
        }))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        match serde_json::from_str::<InverseDocument>(s)? {
            InverseDocument::Tandem(doc) => Self::try_from(doc),
            _ => Err(Error::Input("model file does not hold a tandem model".into())),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TandemDocument {
    format_version: u32,
    bc: Activation,
    inn: NetDocument,
    surrogate: SurrogateDocument,
    history: History,
}

impl TryFrom<TandemDocument> for TandemModel {
    type Error = Error;

    fn try_from(doc: TandemDocument) -> Result<Self> {
        if doc.format_version != TANDEM_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: doc.format_version,
                expected: TANDEM_FORMAT_VERSION,
            });
        }
        let surrogate = SurrogateModel::try_from(doc.surrogate)?;
        let inn = NeuralNet::try_from(doc.inn)?;
        if inn.input_width() != 1 || inn.output_width() != surrogate.dim() {
            return Err(Error::Dimension("stored inverse net has the wrong shape".into()));
        }
        Ok(Self {
            inn,
            surrogate,
            bc: doc.bc,
            history: doc.history,
            inferences: AtomicU64::new(0),
        })
    }
}
