//! Surrogate-based design optimization against deep inverse design.
//!
//! The crate trains neural surrogates of analytic benchmark functions, then
//! asks two families of methods to find designs `x` whose predicted
//! performance hits a target `y`: iterative optimizers (GA, SQP, gradient
//! descent through the surrogate) and inverse models trained once (tandem
//! networks and conditional GANs with a frozen forward network). The
//! [`harness`] module runs the comparative case studies and writes CSV
//! results plus a manifest.

// `!(a > b)` is used on purpose so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod harness;
pub mod inverse;
pub mod nn;
pub mod numfmt;
pub mod optim;
pub mod surrogate;

pub use error::{Error, Result};
