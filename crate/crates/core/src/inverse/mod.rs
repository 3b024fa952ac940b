//! Inverse design models: the tandem network and the conditional GAN with
//! a forward-model loss.

mod diversity;
mod fcgan;
mod tandem;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use diversity::{diversity, diversity_scaled};
pub use fcgan::{
    discriminator_spec, generator_loss, generator_spec, train_fcgan, FcganDocument, FcganModel,
    GanEpoch, LossWeights, DISCRIMINATOR_HIDDEN, FCGAN_FORMAT_VERSION, Z_DIM,
};
pub use tandem::{
    check_output_activation, inn_spec, train_tandem, TandemDocument, TandemModel,
    INVERSE_HIDDEN, TANDEM_FORMAT_VERSION,
};

use crate::error::{Error, Result};
use crate::nn::Tensor2;

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum InverseDocument {
    Tandem(TandemDocument),
    Fcgan(FcganDocument),
}

/// Either kind of trained inverse model, as read from a model file.
#[derive(Debug, Clone)]
pub enum InverseModel {
    Tandem(TandemModel),
    Fcgan(FcganModel),
}

impl InverseModel {
    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(match serde_json::from_str::<InverseDocument>(&s)? {
            InverseDocument::Tandem(doc) => InverseModel::Tandem(doc.try_into()?),
            InverseDocument::Fcgan(doc) => InverseModel::Fcgan(doc.try_into()?),
        })
    }

    /// `count` raw designs for `y_target`. The tandem net is deterministic,
    /// so its rows are identical.
    pub fn sample(&self, y_target: f64, count: usize, seed: u64) -> Result<Tensor2> {
        match self {
            InverseModel::Tandem(m) => {
                if count == 0 {
                    return Err(Error::Input("sample count must be at least 1".into()));
                }
                m.predict_batch(&vec![y_target; count])
            }
            InverseModel::Fcgan(m) => m.generate(y_target, count, seed),
        }
    }

    pub fn surrogate(&self) -> &crate::surrogate::SurrogateModel {
        match self {
            InverseModel::Tandem(m) => &m.surrogate,
            InverseModel::Fcgan(m) => &m.surrogate,
        }
    }
}

/// Rows of the sample CSV: `target,sample_idx,x1..xD,y_surrogate,y_true`.
pub fn samples_csv(
    surrogate: &crate::surrogate::SurrogateModel,
    y_target: f64,
    x: &Tensor2,
) -> Result<String> {
    use crate::bench::TestFunction;
    use crate::numfmt::fmt17;
    let pred = surrogate.predict(x)?;
    let mut s = String::from("target,sample_idx");
    for j in 1..=x.cols() {
        s.push_str(&format!(",x{j}"));
    }
    s.push_str(",y_surrogate,y_true\n");
    for (i, row) in x.iter_rows().enumerate() {
        s.push_str(&format!("{},{i}", fmt17(y_target)));
        for v in row {
            s.push(',');
            s.push_str(&fmt17(*v));
        }
        let truth = surrogate.benchmark.eval(row)?;
        s.push_str(&format!(",{},{}\n", fmt17(pred[i]), fmt17(truth)));
    }
    Ok(s)
}
