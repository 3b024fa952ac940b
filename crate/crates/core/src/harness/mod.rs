//! Case-study harness: evaluation, artifact caching and the four case
//! drivers.

mod artifacts;
mod cases;
mod config;
mod eval;

pub use artifacts::{ArtifactRecord, ArtifactStore};
pub use cases::{reference_surrogate, run_case, CaseOutcome};
pub use config::{
    ArtifactPolicy, Case1Grid, Case2Grid, Case3Grid, Case4Grid, CaseConfig, MethodKind,
    NetBudget, OptimizerBudget,
};
pub use eval::{
    bound_violation, eq7_loss, evaluate, evaluate_designs, ground_truth_check, Designer,
    EvaluationReport, FcganDesigner, OptimizerDesigner, TestSet, Violation,
};
