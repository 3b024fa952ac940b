//! Baseline design optimizers: genetic algorithm, SQP and gradient descent
//! through the surrogate.

mod bp;
mod ga;
mod objective;
mod params;
mod sqp;

pub use bp::bp_optimize;
pub use ga::ga_optimize;
pub use objective::{FunctionTarget, Objective, OptProblem};
pub use params::{BpParams, GaParams, Method, OptParams, OptResult, SqpParams};
pub use sqp::{box_qp, sqp_local, sqp_optimize, LocalRun};

use crate::error::Result;

pub fn optimize(
    method: Method,
    obj: &dyn Objective,
    target: f64,
    params: &OptParams,
) -> Result<OptResult> {
    match method {
        Method::Ga => ga_optimize(obj, target, params),
        Method::Sqp => sqp_optimize(obj, target, params),
        Method::Bp => bp_optimize(obj, target, params),
    }
}
