//! Evaluation of design methods against a held-out target set.

use serde::Serialize;

use crate::bench::{build_dataset, BenchmarkFn, Bounds, TestFunction};
use crate::error::{Error, Result};
use crate::inverse::{FcganModel, TandemModel};
use crate::nn::Tensor2;
use crate::numfmt::derive_seed;
use crate::optim::{optimize, Method, OptParams, OptProblem};
use crate::surrogate::SurrogateModel;

/// Fresh LHS designs and their true performance; the `y` column supplies
/// the targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub x: Tensor2,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl TestSet {
    pub fn sample(f: &BenchmarkFn, n: usize, seed: u64) -> Result<Self> {
        let ds = build_dataset(f, n, seed)?;
        Ok(Self {
            x: ds.x,
            y: ds.y,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Something that proposes one design per target.
pub trait Designer {
    fn label(&self) -> String;

    /// Designs (one row per target) and the cost spent on each target.
    fn design(&self, targets: &[f64]) -> Result<(Tensor2, Vec<f64>)>;
}

/// Runs an iterative optimizer on the surrogate for each target, with a
/// per-target seed derived from `params.rng_seed`.
pub struct OptimizerDesigner<'a> {
    pub method: Method,
    pub surrogate: &'a SurrogateModel,
    pub params: OptParams,
}

impl Designer for OptimizerDesigner<'_> {
    fn label(&self) -> String {
        self.method.to_string()
    }

    fn design(&self, targets: &[f64]) -> Result<(Tensor2, Vec<f64>)> {
        let d = self.surrogate.dim();
        let mut x = Tensor2::zeros(targets.len(), d);
        let mut cost = Vec::with_capacity(targets.len());
        for (i, &t) in targets.iter().enumerate() {
            let mut params = self.params.clone();
            params.rng_seed = derive_seed(self.params.rng_seed, &["target", &i.to_string()]);
            let problem = OptProblem::new(self.surrogate, t)?;
            let r = optimize(self.method, &problem, t, &params)?;
            x.row_mut(i).copy_from_slice(&r.x_star);
            cost.push(r.cost as f64);
        }
        Ok((x, cost))
    }
}

impl Designer for TandemModel {
    fn label(&self) -> String {
        "tn".into()
    }

    fn design(&self, targets: &[f64]) -> Result<(Tensor2, Vec<f64>)> {
        Ok((self.predict_batch(targets)?, vec![1.0; targets.len()]))
    }
}

/// One generated design per target from a trained FCGAN.
pub struct FcganDesigner<'a> {
    pub model: &'a FcganModel,
    pub seed: u64,
}

impl Designer for FcganDesigner<'_> {
    fn label(&self) -> String {
        "fcgan".into()
    }

    fn design(&self, targets: &[f64]) -> Result<(Tensor2, Vec<f64>)> {
        Ok((
            self.model.generate_each(targets, self.seed)?,
            vec![1.0; targets.len()],
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub method: String,
    pub function: String,
    pub dim: usize,
    /// Mean over targets of `|y_t − ŷ(x*)|` with `ŷ` from the surrogate, in
    /// raw units.
    pub loss: f64,
    /// Mean per-target cost.
    pub cost: f64,
    pub bound_violation: f64,
    pub component_violation: f64,
    /// RMSE between targets and the true benchmark at the designs.
    pub y_real_rmse: f64,
}

pub fn evaluate(
    designer: &dyn Designer,
    surrogate: &SurrogateModel,
    test: &TestSet,
) -> Result<EvaluationReport> {
    Ok(evaluate_designs(designer, surrogate, test)?.0)
}

/// [`evaluate`], also returning the designs themselves.
pub fn evaluate_designs(
    designer: &dyn Designer,
    surrogate: &SurrogateModel,
    test: &TestSet,
) -> Result<(EvaluationReport, Tensor2)> {
    if test.is_empty() {
        return Err(Error::Input("test set is empty".into()));
    }
    let (x, cost) = designer.design(&test.y)?;
    let f = surrogate.benchmark;
    let y_hat = surrogate.predict(&x)?;
    let loss = eq7_loss(&test.y, &y_hat);
    let (_, y_real_rmse) = ground_truth_check(&f, &x, &test.y)?;
    let v = bound_violation(&x, &f.bounds())?;
    let report = EvaluationReport {
        method: designer.label(),
        function: f.name().to_string(),
        dim: f.dim(),
        loss,
        cost: cost.iter().sum::<f64>() / cost.len() as f64,
        bound_violation: v.vectors,
        component_violation: v.components,
        y_real_rmse,
    };
    Ok((report, x))
}

/// Mean over targets of the single-output RMSE, `|y_t − ŷ|`.
pub fn eq7_loss(targets: &[f64], predictions: &[f64]) -> f64 {
    targets
        .iter()
        .zip(predictions)
        .map(|(t, p)| (t - p).abs())
        .sum::<f64>()
        / targets.len() as f64
}

/// True performance `f(x̂)` of every design, in or out of bounds, and its
/// RMSE against the targets.
pub fn ground_truth_check(
    f: &BenchmarkFn,
    x: &Tensor2,
    targets: &[f64],
) -> Result<(Vec<f64>, f64)> {
    if x.rows() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} designs for {} targets",
            x.rows(),
            targets.len()
        )));
    }
    let y_real = x.iter_rows().map(|r| f.eval(r)).collect::<Result<Vec<_>>>()?;
    let mse = y_real
        .iter()
        .zip(targets)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / targets.len().max(1) as f64;
    Ok((y_real, mse.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    /// Fraction of designs with at least one coordinate out of bounds.
    pub vectors: f64,
    /// Fraction of all coordinates out of bounds.
    pub components: f64,
}

pub fn bound_violation(x: &Tensor2, bounds: &Bounds) -> Result<Violation> {
    if x.rows() == 0 {
        return Err(Error::Input("no designs to check".into()));
    }
    if x.cols() != bounds.dim() {
        return Err(Error::Dimension("designs and bounds differ in width".into()));
    }
    let mut vectors = 0;
    let mut components = 0;
    for row in x.iter_rows() {
        let out = row
            .iter()
            .enumerate()
            .filter(|&(j, &v)| v < bounds.lower[j] || v > bounds.upper[j])
            .count();
        components += out;
        vectors += usize::from(out > 0);
    }
    Ok(Violation {
        vectors: vectors as f64 / x.rows() as f64,
        components: components as f64 / (x.rows() * x.cols()) as f64,
    })
}
