//! Benchmark functions, Latin hypercube sampling, datasets and scalers.

mod compose;
mod dataset;
mod functions;
mod lhs;

pub use compose::{
    compose_dataset, observation_pool, DataCompositionSpec, POOL_SIZE, REAL_RATIOS, TOTAL_SIZES,
};
pub use dataset::{build_dataset, split, Dataset, Provenance, ScalerPair};
pub use functions::{
    rosenbrock, rosenbrock_gradient, styblinski_tang, styblinski_tang_gradient, BenchmarkFn, BenchmarkKind, Bounds, TestFunction,
    REPLICATION_DIMS,
};
pub use lhs::{lhs_sample, stratum_of};
