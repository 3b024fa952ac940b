//! Conditional GAN whose generator is also scored by a frozen forward
//! surrogate.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::tandem::{check_output_activation, INVERSE_HIDDEN};
use super::InverseDocument;
use crate::bench::{BenchmarkFn, Bounds, Dataset, TestFunction};
use crate::error::{Error, Result};
use crate::nn::{
    bce_with_grad, mse_with_grad, neg_log_with_grad, Activation, AdamState, LayerGrad, MlpSpec,
    NetDocument, NeuralNet, Tensor2, TrainConfig,
};
use crate::numfmt::derive_seed;
use crate::surrogate::{SurrogateDocument, SurrogateModel};

pub const Z_DIM: usize = 10;
pub const FCGAN_FORMAT_VERSION: u32 = 1;
pub const DISCRIMINATOR_HIDDEN: [usize; 3] = [256, 256, 128];

/// Weights of the forward-model term and the adversarial term in the
/// generator loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub w_fnn: f64,
    pub w_adv: f64,
}

impl LossWeights {
    /// `w_fnn` with `w_adv = 1 − w_fnn`.
    pub fn complementary(w_fnn: f64) -> Result<Self> {
        let w = Self {
            w_fnn,
            w_adv: 1.0 - w_fnn,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_fnn >= 0.0 && self.w_adv >= 0.0) || !(self.w_fnn + self.w_adv).is_finite() {
            return Err(Error::Config(format!(
                "loss weights ({}, {}) must be finite and non-negative",
                self.w_fnn, self.w_adv
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GanEpoch {
    pub epoch: usize,
    pub d_loss: f64,
    pub g_loss: f64,
}

#[derive(Debug)]
pub struct FcganModel {
    pub generator: NeuralNet,
    pub discriminator: NeuralNet,
    pub surrogate: SurrogateModel,
    pub z_dim: usize,
    pub weights: LossWeights,
    pub bc: Activation,
    pub history: Vec<GanEpoch>,
    inferences: AtomicU64,
}

impl Clone for FcganModel {
    fn clone(&self) -> Self {
        Self {
            generator: self.generator.clone(),
            discriminator: self.discriminator.clone(),
            surrogate: self.surrogate.clone(),
            z_dim: self.z_dim,
            weights: self.weights,
            bc: self.bc,
            history: self.history.clone(),
            inferences: AtomicU64::new(self.inference_count()),
        }
    }
}

pub fn generator_spec(dim: usize, z_dim: usize, bc: Activation) -> MlpSpec {
    MlpSpec {
        inputs: z_dim + 1,
        hidden: INVERSE_HIDDEN.to_vec(),
        outputs: dim,
        hidden_activation: Activation::Elu,
        output_activation: bc,
        dropout_rate: 0.0,
    }
}

pub fn discriminator_spec(dim: usize) -> MlpSpec {
    MlpSpec {
        inputs: dim + 1,
        hidden: DISCRIMINATOR_HIDDEN.to_vec(),
        outputs: 1,
        hidden_activation: Activation::Elu,
        output_activation: Activation::Sigmoid,
        dropout_rate: 0.0,
    }
}

fn latent<R: Rng + ?Sized>(rows: usize, z_dim: usize, rng: &mut R) -> Tensor2 {
    let data = (0..rows * z_dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Tensor2::from_vec(rows, z_dim, data).expect("finite normals")
}

fn add_grads(a: &mut [LayerGrad], b: &[LayerGrad]) {
    for (ga, gb) in a.iter_mut().zip(b) {
        ga.weight
            .as_mut_slice()
            .iter_mut()
            .zip(gb.weight.as_slice())
            .for_each(|(x, y)| *x += y);
        ga.bias.iter_mut().zip(&gb.bias).for_each(|(x, y)| *x += y);
    }
}

/// Generator loss and its gradient with respect to the generated designs.
fn generator_terms(
    discriminator: &NeuralNet,
    fnn: &NeuralNet,
    weights: LossWeights,
    x_hat: &Tensor2,
    y: &Tensor2,
) -> Result<(f64, Tensor2)> {
    let d = x_hat.cols();
    let tape_d = discriminator.inference_tape(&x_hat.hconcat(y)?)?;
    let (adv, g_p) = neg_log_with_grad(tape_d.output())?;
    let g_adv = discriminator
        .backward(&tape_d, &g_p, false)?
        .input
        .slice_cols(0, d);
    let tape_f = fnn.inference_tape(x_hat)?;
    let (fit, g_y) = mse_with_grad(y, tape_f.output())?;
    let g_fit = fnn.backward(&tape_f, &g_y, false)?.input;
    let mut grad = g_adv;
    for (g, f) in grad.as_mut_slice().iter_mut().zip(g_fit.as_slice()) {
        *g = weights.w_adv * *g + weights.w_fnn * f;
    }
    Ok((weights.w_adv * adv + weights.w_fnn * fit, grad))
}

/// Trains generator and discriminator for exactly `cfg.max_epochs` epochs
/// (patience is ignored). Each batch takes one discriminator step on real
/// `(x, y)` against generated `(x̂, y)` pairs, then one generator step on
/// [`generator_loss`] with the same latent draws. The condition `y` is the
/// batch's standardised labels.
pub fn train_fcgan(
    surrogate: &SurrogateModel,
    train_set: &Dataset,
    cfg: &TrainConfig,
    weights: LossWeights,
    bc: Activation,
) -> Result<FcganModel> {
    cfg.validate()?;
    weights.validate()?;
    check_output_activation(bc)?;
    if train_set.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    let d = surrogate.dim();
    if train_set.dim() != d {
        return Err(Error::Dimension("training set width differs from the surrogate".into()));
    }
    let fnn = {
        let mut f = surrogate.net.clone();
        f.freeze();
        f
    };
    let x_all = surrogate.scalers.scale_x(&train_set.x)?;
    let y_all = surrogate.scalers.scale_y_column(&train_set.y);
    let mut generator = NeuralNet::mlp(
        &generator_spec(d, Z_DIM, bc),
        derive_seed(cfg.rng_seed, &["generator"]),
    )?;
    let mut discriminator = NeuralNet::mlp(
        &discriminator_spec(d),
        derive_seed(cfg.rng_seed, &["discriminator"]),
    )?;
    let mut adam_g = AdamState::new(cfg.learning_rate, &generator.buffer_sizes());
    let mut adam_d = AdamState::new(cfg.learning_rate, &discriminator.buffer_sizes());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.rng_seed, &["fcgan"]));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.max_epochs);

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let (mut d_total, mut g_total) = (0.0, 0.0);
        for chunk in order.chunks(cfg.batch_size) {
            let xb = x_all.select_rows(chunk);
            let yb = y_all.select_rows(chunk);
            let gin = latent(chunk.len(), Z_DIM, &mut rng).hconcat(&yb)?;

            let fake = generator.forward(&gin)?;
            let tape_r = discriminator.inference_tape(&xb.hconcat(&yb)?)?;
            let tape_f = discriminator.inference_tape(&fake.hconcat(&yb)?)?;
            let (l_r, g_r) = bce_with_grad(tape_r.output(), 1.0)?;
            let (l_f, g_f) = bce_with_grad(tape_f.output(), 0.0)?;
            let mut grads = discriminator.backward(&tape_r, &g_r, true)?.params;
            add_grads(&mut grads, &discriminator.backward(&tape_f, &g_f, true)?.params);
            discriminator.apply_adam(&mut adam_d, &grads)?;

            let tape_g = generator.inference_tape(&gin)?;
            let (l_g, g_x) = generator_terms(&discriminator, &fnn, weights, tape_g.output(), &yb)?;
            let g_grads = generator.backward(&tape_g, &g_x, true)?.params;
            generator.apply_adam(&mut adam_g, &g_grads)?;

            if !(l_r + l_f).is_finite() || !l_g.is_finite() {
                return Err(Error::NonFinite(format!("GAN loss at epoch {epoch}")));
            }
            d_total += (l_r + l_f) * chunk.len() as f64;
            g_total += l_g * chunk.len() as f64;
        }
        let n = train_set.len() as f64;
        history.push(GanEpoch {
            epoch,
            d_loss: d_total / n,
            g_loss: g_total / n,
        });
    }

    Ok(FcganModel {
        generator,
        discriminator,
        surrogate: surrogate.clone(),
        z_dim: Z_DIM,
        weights,
        bc,
        history,
        inferences: AtomicU64::new(0),
    })
}

/// `w_adv · (−mean log D(G(z|y), y)) + w_fnn · MSE(y, FNN(G(z|y)))` for
/// standardised conditions `y` (one column).
pub fn generator_loss(model: &FcganModel, z: &Tensor2, y: &Tensor2) -> Result<f64> {
    if z.cols() != model.z_dim || y.cols() != 1 || z.rows() != y.rows() {
        return Err(Error::Dimension("latent and condition batches do not line up".into()));
    }
    let x_hat = model.generator.forward(&z.hconcat(y)?)?;
    Ok(generator_terms(&model.discriminator, &model.surrogate.net, model.weights, &x_hat, y)?.0)
}

impl FcganModel {
    pub fn dim(&self) -> usize {
        self.surrogate.dim()
    }

    pub fn benchmark(&self) -> BenchmarkFn {
        self.surrogate.benchmark
    }

    pub fn bounds(&self) -> Bounds {
        self.surrogate.benchmark.bounds()
    }

    pub fn inference_count(&self) -> u64 {
        self.inferences.load(Ordering::Relaxed)
    }

    /// Scaled designs for latent draws `z` under standardised condition
    /// `y_scaled`, without counting.
    pub fn generate_scaled(&self, z: &Tensor2, y_scaled: f64) -> Result<Tensor2> {
        let y = Tensor2::filled(z.rows(), 1, y_scaled);
        self.generator.forward(&z.hconcat(&y)?)
    }

    /// `count` raw designs for `y_target`; deterministic given `seed`, and
    /// each design counts as one inference.
    pub fn generate(&self, y_target: f64, count: usize, seed: u64) -> Result<Tensor2> {
        if count == 0 {
            return Err(Error::Input("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = latent(count, self.z_dim, &mut rng);
        let u = self.generate_scaled(&z, self.surrogate.scalers.scale_y(y_target))?;
        self.inferences.fetch_add(count as u64, Ordering::Relaxed);
        self.surrogate.scalers.unscale_x(&u)
    }

    /// One raw design per target, each from its own latent draw.
    pub fn generate_each(&self, y_targets: &[f64], seed: u64) -> Result<Tensor2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = latent(y_targets.len(), self.z_dim, &mut rng);
        let ys: Vec<f64> = y_targets
            .iter()
            .map(|&y| self.surrogate.scalers.scale_y(y))
            .collect();
        let u = self.generator.forward(&z.hconcat(&Tensor2::column(&ys)?)?)?;
        self.inferences
            .fetch_add(y_targets.len() as u64, Ordering::Relaxed);
        self.surrogate.scalers.unscale_x(&u)
    }

    /// Fraction of correct calls when the discriminator scores the rows of
    /// `ds` (real) and one generated design per label (fake) at 0.5.
    pub fn discriminator_accuracy(&self, ds: &Dataset, seed: u64) -> Result<f64> {
        let x = self.surrogate.scalers.scale_x(&ds.x)?;
        let y = self.surrogate.scalers.scale_y_column(&ds.y);
        let z = latent(ds.len(), self.z_dim, &mut ChaCha8Rng::seed_from_u64(seed));
        let fake = self.generator.forward(&z.hconcat(&y)?)?;
        let p_real = self.discriminator.forward(&x.hconcat(&y)?)?;
        let p_fake = self.discriminator.forward(&fake.hconcat(&y)?)?;
        let hits = p_real.as_slice().iter().filter(|&&p| p > 0.5).count()
            + p_fake.as_slice().iter().filter(|&&p| p < 0.5).count();
        Ok(hits as f64 / (2 * ds.len()) as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&InverseDocument::Fcgan(FcganDocument {
            format_version: FCGAN_FORMAT_VERSION,
            bc: self.bc,
            z_dim: self.z_dim,
            weights: self.weights,
            generator: NetDocument::from(&self.generator),
            discriminator: NetDocument::from(&self.discriminator),
            surrogate: SurrogateDocument::from(&self.surrogate),
            history: self.history.clone(),
        }))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        match serde_json::from_str::<InverseDocument>(s)? {
            InverseDocument::Fcgan(doc) => Self::try_from(doc),
            _ => Err(Error::Input("model file does not hold a FCGAN model".into())),
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
pub struct FcganDocument {
    format_version: u32,
    bc: Activation,
    z_dim: usize,
    weights: LossWeights,
    generator: NetDocument,
    discriminator: NetDocument,
    surrogate: SurrogateDocument,
    history: Vec<GanEpoch>,
}

impl TryFrom<FcganDocument> for FcganModel {
    type Error = Error;

    fn try_from(doc: FcganDocument) -> Result<Self> {
        if doc.format_version != FCGAN_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: doc.format_version,
                expected: FCGAN_FORMAT_VERSION,
            });
        }
        let surrogate = SurrogateModel::try_from(doc.surrogate)?;
        let generator = NeuralNet::try_from(doc.generator)?;
        let discriminator = NeuralNet::try_from(doc.discriminator)?;
        let d = surrogate.dim();
        if generator.input_width() != doc.z_dim + 1
            || generator.output_width() != d
            || discriminator.input_width() != d + 1
            || discriminator.output_width() != 1
        {
            return Err(Error::Dimension("stored GAN networks have the wrong shape".into()));
        }
        Ok(Self {
            generator,
            discriminator,
            surrogate,
            z_dim: doc.z_dim,
            weights: doc.weights,
            bc: doc.bc,
            history: doc.history,
            inferences: AtomicU64::new(0),
        })
    }
}
