//! Sequential dense networks with reverse-mode gradients for parameters and
//! inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::activation::Activation;
use super::adam::AdamState;
use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// One dense layer: `out = activation(x · weight + bias)`.
///
/// `weight` has shape `(inputs, outputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub(crate) weight: Tensor2,
    pub(crate) bias: Vec<f64>,
    pub(crate) activation: Activation,
    pub(crate) frozen: bool,
}

impl Dense {
    pub fn new(weight: Tensor2, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(Error::Dimension(format!(
                "bias of length {} for a layer with {} outputs",
                bias.len(),
                weight.cols()
            )));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("bias".into()));
        }
        Ok(Self {
            weight,
            bias,
            activation,
            frozen: false,
        })
    }

    /// Uniform He (ReLU/ELU) or Glorot (everything else) initialisation.
    pub fn init<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = match activation {
            Activation::Relu | Activation::Elu => (6.0 / inputs as f64).sqrt(),
            _ => (6.0 / (inputs + outputs) as f64).sqrt(),
        };
        let data = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            weight: Tensor2::from_vec(inputs, outputs, data).expect("finite init"),
            bias: vec![0.0; outputs],
            activation,
            frozen: false,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weight.cols()
    }

    pub fn weight(&self) -> &Tensor2 {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    fn affine(&self, x: &Tensor2) -> Result<Tensor2> {
        let mut z = x.matmul(&self.weight)?;
        let cols = z.cols();
        for row in z.as_mut_slice().chunks_exact_mut(cols) {
            for (v, b) in row.iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(z)
    }
}

/// Layer sizes and activations for building a fresh network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub inputs: usize,
    pub hidden: Vec<usize>,
    pub outputs: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub dropout_rate: f64,
}

/// A stack of dense layers. Dropout (inverted scaling) follows every hidden
/// layer when training; the output layer never drops.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralNet {
    pub(crate) layers: Vec<Dense>,
    pub(crate) dropout_rate: f64,
}

/// Intermediate values recorded by a forward pass, consumed by
/// [`NeuralNet::backward`].
#[derive(Debug, Clone)]
pub struct Tape {
    input: Tensor2,
    pre: Vec<Tensor2>,
    act: Vec<Tensor2>,
    /// Dropout multipliers (0 or 1/(1-p)) for hidden layers that dropped.
    masks: Vec<Option<Vec<f64>>>,
}

impl Tape {
    /// The network output of the recorded pass.
    pub fn output(&self) -> &Tensor2 {
        self.act.last().expect("non-empty network")
    }
}

/// Gradient of one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weight: Tensor2,
    pub bias: Vec<f64>,
}

/// Parameter and input gradients from one backward pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    /// One entry per layer; frozen layers report zeros.
    pub params: Vec<LayerGrad>,
    pub input: Tensor2,
}

impl NeuralNet {
    pub fn from_layers(layers: Vec<Dense>, dropout_rate: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Input("a network needs at least one layer".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Input(format!(
                "dropout rate {dropout_rate} outside [0, 1)"
            )));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::Dimension(format!(
                    "layer {k} emits {} values but layer {} expects {}",
                    pair[0].outputs(),
                    k + 1,
                    pair[1].inputs()
                )));
            }
        }
        Ok(Self {
            layers,
            dropout_rate,
        })
    }

    pub fn mlp(spec: &MlpSpec, seed: u64) -> Result<Self> {
        if spec.inputs == 0 || spec.outputs == 0 || spec.hidden.contains(&0) {
            return Err(Error::Input("layer widths must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut widths = vec![spec.inputs];
        widths.extend(&spec.hidden);
        widths.push(spec.outputs);
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let act = if k == last {
                    spec.output_activation
                } else {
                    spec.hidden_activation
                };
                Dense::init(w[0], w[1], act, &mut rng)
            })
            .collect();
        Self::from_layers(layers, spec.dropout_rate)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, Dense::outputs)
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn output_activation(&self) -> Activation {
        self.layers.last().expect("non-empty").activation
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    /// Marks every layer frozen; frozen layers still pass input gradients
    /// through but never change during training.
    pub fn freeze(&mut self) {
        self.layers.iter_mut().for_each(|l| l.frozen = true);
    }

    pub fn set_frozen(&mut self, layer: usize, frozen: bool) {
        self.layers[layer].frozen = frozen;
    }

    pub fn is_frozen(&self) -> bool {
        self.layers.iter().all(|l| l.frozen)
    }

    fn check_input(&self, x: &Tensor2) -> Result<()> {
        if x.cols() != self.input_width() {
            return Err(Error::Dimension(format!(
                "network expects {} input columns, got {}",
                self.input_width(),
                x.cols()
            )));
        }
        if !x.all_finite() {
            return Err(Error::NonFinite("network input".into()));
        }
        Ok(())
    }

    /// Inference pass: no dropout, deterministic.
    pub fn forward(&self, x: &Tensor2) -> Result<Tensor2> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers {
            let mut z = layer.affine(&a)?;
            let act = layer.activation;
            z.map_inplace(|v| act.apply(v));
            a = z;
        }
        Ok(a)
    }

    /// Forward pass that records what [`backward`](Self::backward) needs.
    /// Dropout masks are drawn from `dropout` only when it is `Some` and the
    /// network has a non-zero dropout rate.
    pub fn forward_tape<R: Rng + ?Sized>(
        &self,
        x: &Tensor2,
        mut dropout: Option<&mut R>,
    ) -> Result<Tape> {
        self.check_input(x)?;
        let n = self.layers.len();
        let mut pre = Vec::with_capacity(n);
        let mut act = Vec::with_capacity(n);
        let mut masks = Vec::with_capacity(n);
        let keep = 1.0 - self.dropout_rate;
        for (k, layer) in self.layers.iter().enumerate() {
            let z = {
                let input = if k == 0 { x } else { &act[k - 1] };
                layer.affine(input)?
            };
            let mut h = z.clone();
            let f = layer.activation;
            h.map_inplace(|v| f.apply(v));
            let mask = match dropout.as_deref_mut() {
                Some(rng) if k + 1 < n && self.dropout_rate > 0.0 => {
                    let m: Vec<f64> = (0..h.as_slice().len())
                        .map(|_| {
                            if rng.random::<f64>() < self.dropout_rate {
                                0.0
                            } else {
                                1.0 / keep
                            }
                        })
                        .collect();
                    Some(m)
                }
                _ => None,
            };
            if let Some(m) = &mask {
                // The next layer consumes h ⊙ mask; backward recomputes h
                // from z for masked layers.
                h.as_mut_slice()
                    .iter_mut()
                    .zip(m)
                    .for_each(|(v, s)| *v *= s);
            }
            pre.push(z);
            masks.push(mask);
            act.push(h);
        }
        Ok(Tape {
            input: x.clone(),
            pre,
            act,
            masks,
        })
    }

    /// Tape of an inference pass (no dropout), ready for [`Self::backward`].
    pub fn inference_tape(&self, x: &Tensor2) -> Result<Tape> {
        self.forward_tape::<ChaCha8Rng>(x, None)
    }

    /// Reverse pass. `grad_out` is dLoss/dOutput for the taped forward
    /// pass. When `with_params` is false only the input gradient is computed
    /// and `params` is empty.
    pub fn backward(&self, tape: &Tape, grad_out: &Tensor2, with_params: bool) -> Result<Gradients> {
        if grad_out.shape() != tape.output().shape() {
            return Err(Error::Dimension(format!(
                "output gradient is {:?} but the output is {:?}",
                grad_out.shape(),
                tape.output().shape()
            )));
        }
        let n = self.layers.len();
        let mut params: Vec<LayerGrad> = Vec::new();
        let mut delta = grad_out.clone();
        for k in (0..n).rev() {
            let layer = &self.layers[k];
            // Through dropout: the output of layer k is h ⊙ mask.
            if let Some(mask) = &tape.masks[k] {
                delta
                    .as_mut_slice()
                    .iter_mut()
                    .zip(mask)
                    .for_each(|(d, m)| *d *= m);
            }
            // Through the activation. For masked layers `act` stores the
            // dropped output, so recover h from z.
            let f = layer.activation;
            let z = tape.pre[k].as_slice();
            if tape.masks[k].is_some() {
                for (d, &zv) in delta.as_mut_slice().iter_mut().zip(z) {
                    *d *= f.derivative(zv, f.apply(zv));
                }
            } else {
                let h = tape.act[k].as_slice();
                for ((d, &zv), &hv) in delta.as_mut_slice().iter_mut().zip(z).zip(h) {
                    *d *= f.derivative(zv, hv);
                }
            }
            let input = if k == 0 { &tape.input } else { &tape.act[k - 1] };
            if with_params {
                if layer.frozen {
                    params.push(LayerGrad {
                        weight: Tensor2::zeros(layer.inputs(), layer.outputs()),
                        bias: vec![0.0; layer.outputs()],
                    });
                } else {
                    let weight = input.t_matmul(&delta)?;
                    let mut bias = vec![0.0; layer.outputs()];
                    for row in delta.iter_rows() {
                        bias.iter_mut().zip(row).for_each(|(b, d)| *b += d);
                    }
                    params.push(LayerGrad { weight, bias });
                }
            }
            delta = delta.matmul_t(&layer.weight)?;
        }
        params.reverse();
        Ok(Gradients {
            params,
            input: delta,
        })
    }

    /// Parameter and input gradients of an inference-mode pass at `x` for
    /// the upstream gradient `grad_out`.
    pub fn gradients(&self, x: &Tensor2, grad_out: &Tensor2) -> Result<Gradients> {
        let tape = self.inference_tape(x)?;
        self.backward(&tape, grad_out, true)
    }

    /// Output and input gradient of `Σ_i w_i · out_i` (row-wise weights
    /// given by `grad_out`) at `x`, without parameter gradients.
    pub fn input_gradient(&self, x: &Tensor2, grad_out: &Tensor2) -> Result<(Tensor2, Tensor2)> {
        let tape = self.inference_tape(x)?;
        let g = self.backward(&tape, grad_out, false)?;
        Ok((tape.output().clone(), g.input))
    }

    /// Applies one Adam update to every unfrozen layer.
    pub fn apply_adam(&mut self, adam: &mut AdamState, grads: &[LayerGrad]) -> Result<()> {
        if grads.len() != self.layers.len() {
            return Err(Error::Dimension(format!(
                "{} layer gradients for {} layers",
                grads.len(),
                self.layers.len()
            )));
        }
        let mut params: Vec<Option<&mut [f64]>> = Vec::with_capacity(2 * self.layers.len());
        let mut gs: Vec<&[f64]> = Vec::with_capacity(2 * self.layers.len());
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            let frozen = layer.frozen;
            let w = layer.weight.as_mut_slice();
            let b = layer.bias.as_mut_slice();
            params.push((!frozen).then_some(w));
            params.push((!frozen).then_some(b));
            gs.push(g.weight.as_slice());
            gs.push(&g.bias);
        }
        adam.step_masked(&mut params, &gs)
    }

    /// Buffer sizes in the order used by [`apply_adam`](Self::apply_adam).
    pub fn buffer_sizes(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.as_slice().len(), l.bias.len()])
            .collect()
    }

    /// All parameters, flattened layer by layer (weights then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(l.weight.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    /// Overwrites every parameter from a flat buffer in
    /// [`flat_params`](Self::flat_params) order.
    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Dimension(format!(
                "{} values for {} parameters",
                flat.len(),
                self.parameter_count()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let w = l.weight.as_mut_slice();
            w.copy_from_slice(&flat[at..at + w.len()]);
            at += w.len();
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        Ok(())
    }
}
