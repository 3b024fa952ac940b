//! Versioned JSON form of a [`NeuralNet`].

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::net::{Dense, NeuralNet};
use super::tensor::Tensor2;
use crate::error::{Error, Result};
use crate::numfmt::{exact_f64, exact_vec};

pub const NET_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    #[serde(rename = "in")]
    pub inputs: usize,
    #[serde(rename = "out")]
    pub outputs: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
struct Decimals(#[serde(with = "exact_vec")] Vec<f64>);

/// Serialized network. Numbers carry 17 significant digits so a load
/// reproduces every parameter bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDocument {
    format_version: u32,
    layer_specs: Vec<LayerSpec>,
    #[serde(with = "exact_f64")]
    dropout_rate: f64,
    weights: Vec<Decimals>,
    biases: Vec<Decimals>,
    #[serde(default)]
    frozen: Vec<bool>,
}

impl From<&NeuralNet> for NetDocument {
    fn from(net: &NeuralNet) -> Self {
        Self {
            format_version: NET_FORMAT_VERSION,
            layer_specs: net
                .layers()
                .iter()
                .map(|l| LayerSpec {
                    inputs: l.inputs(),
                    outputs: l.outputs(),
                    activation: l.activation(),
                })
                .collect(),
            dropout_rate: net.dropout_rate(),
            weights: net
                .layers()
                .iter()
                .map(|l| Decimals(l.weight().as_slice().to_vec()))
                .collect(),
            biases: net
                .layers()
                .iter()
                .map(|l| Decimals(l.bias().to_vec()))
                .collect(),
            frozen: net.layers().iter().map(Dense::is_frozen).collect(),
        }
    }
}

impl TryFrom<NetDocument> for NeuralNet {
    type Error = Error;

    fn try_from(doc: NetDocument) -> Result<Self> {
        if doc.format_version != NET_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: doc.format_version,
                expected: NET_FORMAT_VERSION,
            });
        }
        let n = doc.layer_specs.len();
        if doc.weights.len() != n || doc.biases.len() != n {
            return Err(Error::Dimension(format!(
                "{n} layer specs but {} weight and {} bias arrays",
                doc.weights.len(),
                doc.biases.len()
            )));
        }
        let mut layers = Vec::with_capacity(n);
        for (k, ((spec, w), b)) in doc
            .layer_specs
            .into_iter()
            .zip(doc.weights)
            .zip(doc.biases)
            .enumerate()
        {
            let weight = Tensor2::from_vec(spec.inputs, spec.outputs, w.0)?;
            let mut layer = Dense::new(weight, b.0, spec.activation)?;
            layer.frozen = doc.frozen.get(k).copied().unwrap_or(false);
            layers.push(layer);
        }
        NeuralNet::from_layers(layers, doc.dropout_rate)
    }
}

impl NeuralNet {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&NetDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<NetDocument>(s)?.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::MlpSpec;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(seed in any::<u64>(), hidden in 1usize..6) {
            let mut net = NeuralNet::mlp(&MlpSpec {
                inputs: 3,
                hidden: vec![hidden, 4],
                outputs: 2,
                hidden_activation: Activation::Elu,
                output_activation: Activation::TanhBc,
                dropout_rate: 0.2,
            }, seed).unwrap();
            net.set_frozen(1, true);
            let back = NeuralNet::from_json(&net.to_json().unwrap()).unwrap();
            prop_assert_eq!(&back, &net);
            let bits = |n: &NeuralNet| n.flat_params().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&net));
        }
    }

    #[test]
    fn document_has_the_expected_fields() {
        let net = NeuralNet::mlp(
            &MlpSpec {
                inputs: 2,
                hidden: vec![3],
                outputs: 1,
                hidden_activation: Activation::Relu,
                output_activation: Activation::Identity,
                dropout_rate: 0.0,
            },
            0,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["layer_specs"][0]["in"], 2);
        assert_eq!(v["layer_specs"][1]["activation"], "identity");
        assert_eq!(v["weights"][0].as_array().unwrap().len(), 6);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let s = r#"{"format_version":9,"layer_specs":[],"dropout_rate":0.0,"weights":[],"biases":[]}"#;
        assert!(matches!(
            NeuralNet::from_json(s),
            Err(Error::FormatVersion { found: 9, .. })
        ));
    }
}
