//! Mini-batch training with early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::loss::Loss;
use super::net::NeuralNet;
use super::tensor::Tensor2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub early_stop_patience: usize,
    pub rng_seed: u64,
}

impl TrainConfig {
    /// Surrogate hyperparameters: Adam at 1e-4, 1000 epochs, batch 128,
    /// patience 50.
    pub fn surrogate(seed: u64) -> Self {
        Self {
            learning_rate: 1e-4,
            max_epochs: 1000,
            batch_size: 128,
            early_stop_patience: 50,
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 || self.early_stop_patience == 0 {
            return Err(Error::Config(
                "batch_size, max_epochs and early_stop_patience must be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Inputs and targets for supervised training, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x: Tensor2,
    pub y: Tensor2,
}

impl Samples {
    pub fn new(x: Tensor2, y: Tensor2) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::Dimension(format!(
                "{} inputs but {} targets",
                x.rows(),
                y.rows()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub val: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochLoss>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl History {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn best_val(&self) -> Option<f64> {
        self.epochs
            .get(self.best_epoch.checked_sub(1)?)
            .map(|e| e.val)
    }

    /// `epoch,train_mse,val_mse` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_mse,val_mse\n");
        for e in &self.epochs {
            s.push_str(&format!(
                "{},{},{}\n",
                e.epoch,
                crate::numfmt::fmt17(e.train),
                crate::numfmt::fmt17(e.val)
            ));
        }
        s
    }
}

/// Tracks the best validation loss and decides when to stop.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best: f64,
    best_epoch: usize,
    since_best: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
        }
    }

    /// Records the validation loss of `epoch` (1-based). Returns whether it
    /// is a new best.
    pub fn observe(&mut self, epoch: usize, val: f64) -> bool {
        if val < self.best {
            self.best = val;
            self.best_epoch = epoch;
            self.since_best = 0;
            true
        } else {
            self.since_best += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.since_best >= self.patience
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

/// Trains `net` in place on `train`, validating on `val` after each epoch.
///
/// Batches are reshuffled every epoch from a generator seeded by
/// `cfg.rng_seed`, which also drives dropout. When validation loss fails to
/// improve for `cfg.early_stop_patience` epochs training stops; either way the
/// parameters from the best validation epoch are restored.
pub fn train(
    net: &mut NeuralNet,
    train: &Samples,
    val: &Samples,
    cfg: &TrainConfig,
    loss: &dyn Loss,
) -> Result<History> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::Input("training and validation sets must be non-empty".into()));
    }
    if train.x.cols() != net.input_width() || val.x.cols() != net.input_width() {
        return Err(Error::Dimension(format!(
            "network expects {} input columns",
            net.input_width()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut adam = AdamState::new(cfg.learning_rate, &net.buffer_sizes());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stopper = EarlyStopper::new(cfg.early_stop_patience);
    let mut best_params = net.flat_params();
    let mut history = History::default();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = train.x.select_rows(chunk);
            let yb = train.y.select_rows(chunk);
            let tape = net.forward_tape(&xb, Some(&mut rng))?;
            let (l, grad) = loss.value_and_grad(tape.output(), &yb)?;
            if !l.is_finite() {
                return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
            }
            let grads = net.backward(&tape, &grad, true)?;
            net.apply_adam(&mut adam, &grads.params)?;
            total += l * chunk.len() as f64;
        }
        let train_loss = total / train.len() as f64;
        let val_loss = loss.value(&net.forward(&val.x)?, &val.y)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFinite(format!("validation loss at epoch {epoch}")));
        }
        history.epochs.push(EpochLoss {
            epoch,
            train: train_loss,
            val: val_loss,
        });
        if stopper.observe(epoch, val_loss) {
            best_params = net.flat_params();
        }
        if stopper.should_stop() {
            history.stopped_early = true;
            break;
        }
    }
    net.set_flat_params(&best_params)?;
    history.best_epoch = stopper.best_epoch();
    Ok(history)
}
