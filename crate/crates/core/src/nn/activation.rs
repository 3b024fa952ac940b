use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Element-wise activation applied after a dense layer.
///
/// `Sigmoid` and `TanhBc` squash into the open interval (0, 1); they are the
/// output activations that keep inverse-model designs inside the box bounds
/// once min-max scaling is undone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    /// ELU with alpha = 1.
    Elu,
    Sigmoid,
    /// `(tanh(v) + 1) / 2`.
    TanhBc,
    /// `½·(eᵛ − e⁻ᵛ)/(eᵛ + e⁻ᵛ + 1)`, the formula exactly as printed in the
    /// source material. Its range is (−½, ½), so it does not bound designs to
    /// [0, 1]; kept only for comparison.
    TanhBcLiteral,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Elu => {
                if v > 0.0 {
                    v
                } else {
                    v.exp_m1()
                }
            }
            Activation::Sigmoid => sigmoid(v),
            Activation::TanhBc => 0.5 * (v.tanh() + 1.0),
            Activation::TanhBcLiteral => {
                // Divide through by e^|v| so large inputs do not overflow.
                let a = v.abs();
                let e2 = (-2.0 * a).exp();
                let num = 1.0 - e2;
                let den = 1.0 + e2 + (-a).exp();
                0.5 * v.signum() * num / den
            }
            Activation::Identity => v,
        }
    }

    /// Derivative with respect to the pre-activation `z`, given `z` and the
    /// already computed output `a = apply(z)`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Elu => {
                if z > 0.0 {
                    1.0
                } else {
                    a + 1.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::TanhBc => {
                let t = 2.0 * a - 1.0;
                0.5 * (1.0 - t * t)
            }
            Activation::TanhBcLiteral => {
                // f = ½·sinh/(cosh + ½) after dividing num and den by 2.
                let (s, c) = (z.sinh(), z.cosh());
                if !c.is_finite() {
                    return 0.0;
                }
                let den = c + 0.5;
                0.5 * (c * den - s * s) / (den * den)
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Elu => "elu",
            Activation::Sigmoid => "sigmoid",
            Activation::TanhBc => "tanh_bc",
            Activation::TanhBcLiteral => "tanh_bc_literal",
            Activation::Identity => "identity",
        }
    }

    /// True for the activations whose range is the open unit interval.
    pub fn is_bounded_unit(self) -> bool {
        matches!(self, Activation::Sigmoid | Activation::TanhBc)
    }
}

#[inline]
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "relu" => Activation::Relu,
            "elu" => Activation::Elu,
            "sigmoid" => Activation::Sigmoid,
            "tanh_bc" => Activation::TanhBc,
            "tanh_bc_literal" => Activation::TanhBcLiteral,
            "identity" | "none" => Activation::Identity,
            other => return Err(Error::Input(format!("unknown activation `{other}`"))),
        })
    }
}
