//! Optimizer settings and results.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ga,
    Sqp,
    Bp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ga, Method::Sqp, Method::Bp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ga => "ga",
            Method::Sqp => "sqp",
            Method::Bp => "bp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(Method::Ga),
            "sqp" => Ok(Method::Sqp),
            "bp" => Ok(Method::Bp),
            other => Err(Error::Input(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1/D`.
    pub mutation_rate: Option<f64>,
    /// Mutation standard deviation as a fraction of each dimension's range.
    pub mutation_sigma: f64,
    pub tournament_size: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_rate: 0.9,
            mutation_rate: None,
            mutation_sigma: 0.1,
            tournament_size: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqpParams {
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
}

impl Default for SqpParams {
    fn default() -> Self {
        Self {
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            step_tol: 1e-8,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpParams {
    /// Adam learning rate on unit-box coordinates.
    pub step_size: f64,
}

impl Default for BpParams {
    fn default() -> Self {
        Self { step_size: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptParams {
    pub num_initial: usize,
    pub max_iterations: usize,
    pub rng_seed: u64,
    /// GA and BP stop once the objective falls below this.
    pub tolerance: f64,
    #[serde(default)]
    pub ga: GaParams,
    #[serde(default)]
    pub sqp: SqpParams,
    #[serde(default)]
    pub bp: BpParams,
}

impl OptParams {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            num_initial: 10,
            max_iterations: 100,
            rng_seed,
            tolerance: 1e-6,
            ga: GaParams::default(),
            sqp: SqpParams::default(),
            bp: BpParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_initial == 0 || self.max_iterations == 0 {
            return Err(Error::Config(
                "num_initial and max_iterations must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.ga.crossover_rate) {
            return Err(Error::Config("crossover rate must lie in [0, 1]".into()));
        }
        if self.ga.tournament_size == 0 {
            return Err(Error::Config("tournament size must be at least 1".into()));
        }
        if !(self.bp.step_size > 0.0) {
            return Err(Error::Config("BP step size must be positive".into()));
        }
        if !(self.sqp.backtrack > 0.0 && self.sqp.backtrack < 1.0) {
            return Err(Error::Config("SQP backtracking factor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub method: Method,
    pub target: f64,
    pub x_star: Vec<f64>,
    pub objective: f64,
    /// Generations for GA, accepted iterations for SQP and BP.
    pub cost: usize,
    pub trace: Vec<f64>,
}

impl OptResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
