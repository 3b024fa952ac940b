//! Finite-difference oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use invbench::nn::{Activation, MlpSpec, NeuralNet, Tensor2};
use invbench::surrogate::surrogate_spec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;

const ACTIVATIONS: [Activation; 6] = [
    Activation::Relu,
    Activation::Elu,
    Activation::Sigmoid,
    Activation::TanhBc,
    Activation::TanhBcLiteral,
    Activation::Identity,
];

/// `|a − b| / max(|a|, |b|, 1)`: relative for large gradients, absolute
/// near zero where central differences lose relative precision.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct OracleReport {
    pub checks: usize,
    pub worst: f64,
}

impl OracleReport {
    fn add(&mut self, analytic: f64, numeric: f64) {
        self.checks += 1;
        let e = rel_err(analytic, numeric);
        if e > self.worst || e.is_nan() {
            self.worst = if e.is_nan() { f64::INFINITY } else { e };
        }
    }
}

fn weighted_sum(net: &NeuralNet, x: &Tensor2, w: &Tensor2) -> f64 {
    net.forward(x)
        .unwrap()
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .map(|(a, b)| a * b)
        .sum()
}

/// Random small networks over every activation; compares parameter and
/// input gradients of `Σ w ⊙ net(x)` with central differences.
pub fn random_net_oracle(nets: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::default();
    for k in 0..nets {
        let inputs = rng.random_range(1..=4);
        let hidden = (0..rng.random_range(1..=2))
            .map(|_| rng.random_range(2..=6))
            .collect();
        let outputs = rng.random_range(1..=3);
        let spec = MlpSpec {
            inputs,
            hidden,
            outputs,
            hidden_activation: ACTIVATIONS[k % ACTIVATIONS.len()],
            output_activation: ACTIVATIONS[(k / ACTIVATIONS.len() + k) % ACTIVATIONS.len()],
            dropout_rate: 0.0,
        };
        let mut net = NeuralNet::mlp(&spec, rng.random()).unwrap();
        let rows = rng.random_range(1..=3);
        let x = Tensor2::from_vec(
            rows,
            inputs,
            (0..rows * inputs).map(|_| rng.random_range(-1.5..1.5)).collect(),
        )
        .unwrap();
        let w = Tensor2::from_vec(
            rows,
            outputs,
            (0..rows * outputs).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        // Random biases too: zero-initialised biases put ReLU units fed by
        // dead units exactly on the kink, where no derivative exists.
        let params: Vec<f64> = (0..net.parameter_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        net.set_flat_params(&params).unwrap();
        let g = net.gradients(&x, &w).unwrap();

        for i in 0..x.as_slice().len() {
            let (mut up, mut dn) = (x.clone(), x.clone());
            up.as_mut_slice()[i] += FD_STEP;
            dn.as_mut_slice()[i] -= FD_STEP;
            let fd = (weighted_sum(&net, &up, &w) - weighted_sum(&net, &dn, &w)) / (2.0 * FD_STEP);
            report.add(g.input.as_slice()[i], fd);
        }

        let analytic: Vec<f64> = g
            .params
            .iter()
            .flat_map(|l| l.weight.as_slice().iter().chain(&l.bias).copied().collect::<Vec<_>>())
            .collect();
        let base = net.flat_params();
        for (i, a) in analytic.iter().enumerate() {
            let mut p = base.clone();
            p[i] = base[i] + FD_STEP;
            net.set_flat_params(&p).unwrap();
            let fu = weighted_sum(&net, &x, &w);
            p[i] = base[i] - FD_STEP;
            net.set_flat_params(&p).unwrap();
            let fdn = weighted_sum(&net, &x, &w);
            report.add(*a, (fu - fdn) / (2.0 * FD_STEP));
        }
        net.set_flat_params(&base).unwrap();
    }
    report
}

/// Input gradients of a surrogate-architecture network at random interior
/// points of the scaled unit box.
pub fn surrogate_point_oracle(points: usize, dim: usize, seed: u64) -> OracleReport {
    let net = NeuralNet::mlp(&surrogate_spec(dim), seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut report = OracleReport::default();
    let f = |u: &[f64]| net.forward(&Tensor2::from_vec(1, dim, u.to_vec()).unwrap()).unwrap().get(0, 0);
    for _ in 0..points {
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..0.95)).collect();
        let x = Tensor2::from_vec(1, dim, u.clone()).unwrap();
        let (_, g) = net.input_gradient(&x, &Tensor2::filled(1, 1, 1.0)).unwrap();
        for j in 0..dim {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up[j] += FD_STEP;
            dn[j] -= FD_STEP;
            report.add(g.get(0, j), (f(&up) - f(&dn)) / (2.0 * FD_STEP));
        }
    }
    report
}
