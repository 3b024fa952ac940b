//! Case-study configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{BenchmarkKind, REAL_RATIOS, TOTAL_SIZES};
use crate::error::{Error, Result};
use crate::nn::{Activation, TrainConfig};
use crate::optim::{Method, OptParams};

/// Learning rate, epoch budget, batch size and patience of one network
/// family; the seed is supplied per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetBudget {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub early_stop_patience: usize,
}

impl NetBudget {
    pub fn with_seed(&self, rng_seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            batch_size: self.batch_size,
            early_stop_patience: self.early_stop_patience,
            rng_seed,
        }
    }

    pub fn surrogate() -> Self {
        Self {
            learning_rate: 1e-4,
            max_epochs: 1000,
            batch_size: 128,
            early_stop_patience: 50,
        }
    }

    pub fn tandem() -> Self {
        Self {
            learning_rate: 1e-4,
            max_epochs: 1000,
            batch_size: 128,
            early_stop_patience: 50,
        }
    }

    pub fn fcgan() -> Self {
        Self {
            learning_rate: 1e-4,
            max_epochs: 500,
            batch_size: 128,
            // Unused: GAN training runs its full epoch budget.
            early_stop_patience: 500,
        }
    }
}

/// Iterative optimizer settings shared by every target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerBudget {
    pub num_initial: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self {
            num_initial: 10,
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

impl OptimizerBudget {
    pub fn params(&self, rng_seed: u64) -> OptParams {
        let mut p = OptParams::new(rng_seed);
        p.num_initial = self.num_initial;
        p.max_iterations = self.max_iterations;
        p.tolerance = self.tolerance;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Ga,
    Sqp,
    Bp,
    Tn,
    Fcgan,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Ga,
        MethodKind::Sqp,
        MethodKind::Bp,
        MethodKind::Tn,
        MethodKind::Fcgan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Ga => "ga",
            MethodKind::Sqp => "sqp",
            MethodKind::Bp => "bp",
            MethodKind::Tn => "tn",
            MethodKind::Fcgan => "fcgan",
        }
    }

    pub fn optimizer(self) -> Option<Method> {
        match self {
            MethodKind::Ga => Some(Method::Ga),
            MethodKind::Sqp => Some(Method::Sqp),
            MethodKind::Bp => Some(Method::Bp),
            MethodKind::Tn | MethodKind::Fcgan => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case1Grid {
    pub methods: Vec<MethodKind>,
    /// Forward-model weight of the FCGAN row.
    pub fcgan_w_fnn: f64,
}

impl Default for Case1Grid {
    fn default() -> Self {
        Self {
            methods: MethodKind::ALL.to_vec(),
            fcgan_w_fnn: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case2Grid {
    /// Forward-model weights; the adversarial weight is `1 − w_fnn`.
    pub w_fnn: Vec<f64>,
    /// Designs drawn per test target when measuring diversity.
    pub diversity_samples: usize,
    pub demo_target: f64,
    pub demo_count: usize,
    pub demo_w_fnn: f64,
}

impl Default for Case2Grid {
    fn default() -> Self {
        Self {
            w_fnn: vec![0.3, 0.4, 0.5, 0.6, 0.7],
            diversity_samples: 10,
            demo_target: 250.0,
            demo_count: 100,
            demo_w_fnn: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case3Grid {
    pub variants: Vec<Activation>,
}

impl Default for Case3Grid {
    fn default() -> Self {
        Self {
            variants: vec![Activation::Identity, Activation::Sigmoid, Activation::TanhBc],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case4Grid {
    pub sizes: Vec<usize>,
    pub ratios: Vec<f64>,
    pub pool_size: usize,
}

impl Default for Case4Grid {
    fn default() -> Self {
        Self {
            sizes: TOTAL_SIZES.to_vec(),
            ratios: REAL_RATIOS.to_vec(),
            pool_size: crate::bench::POOL_SIZE,
        }
    }
}

/// Where trained models are cached and whether missing ones may be built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactPolicy {
    /// Defaults to `<out-dir>/artifacts`.
    pub dir: Option<PathBuf>,
    pub build: bool,
}

impl Default for ArtifactPolicy {
    fn default() -> Self {
        Self {
            dir: None,
            build: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaseConfig {
    pub case: u8,
    pub functions: Vec<BenchmarkKind>,
    pub dims: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Seeds the reference datasets and surrogates, which are shared by
    /// every seed and every case.
    pub surrogate_seed: u64,
    pub data_size: usize,
    pub test_size: usize,
    pub surrogate: NetBudget,
    pub tandem: NetBudget,
    pub fcgan: NetBudget,
    pub optimizer: OptimizerBudget,
    pub case1: Case1Grid,
    pub case2: Case2Grid,
    pub case3: Case3Grid,
    pub case4: Case4Grid,
    /// Not part of the configuration hash: where artifacts live does not
    /// change results.
    pub artifacts: ArtifactPolicy,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            case: 1,
            functions: BenchmarkKind::ALL.to_vec(),
            dims: vec![2, 10, 30],
            seeds: vec![1, 2, 3],
            surrogate_seed: 0,
            data_size: 10_000,
            test_size: 100,
            surrogate: NetBudget::surrogate(),
            tandem: NetBudget::tandem(),
            fcgan: NetBudget::fcgan(),
            optimizer: OptimizerBudget::default(),
            case1: Case1Grid::default(),
            case2: Case2Grid::default(),
            case3: Case3Grid::default(),
            case4: Case4Grid::default(),
            artifacts: ArtifactPolicy::default(),
        }
    }
}

impl CaseConfig {
    /// Standard grid for `case`: dimensions {2, 10, 30} for Case 1, the
    /// two-dimensional cells elsewhere (rosenbrock only for Case 2).
    pub fn standard(case: u8) -> Result<Self> {
        let mut cfg = Self {
            case,
            ..Self::default()
        };
        match case {
            1 => {}
            2 => {
                cfg.functions = vec![BenchmarkKind::Rosenbrock];
                cfg.dims = vec![2];
                cfg.seeds = vec![1, 2, 3, 4, 5];
            }
            3 => {
                cfg.dims = vec![2];
            }
            4 => {
                cfg.dims = vec![2];
                cfg.seeds = vec![1];
            }
            other => return Err(Error::Config(format!("unknown case {other}"))),
        }
        Ok(cfg)
    }

    /// Every reference dimension from 2 to 100.
    pub fn with_full_dims(mut self) -> Self {
        self.dims = crate::bench::REPLICATION_DIMS.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.case) {
            return Err(Error::Config(format!("unknown case {}", self.case)));
        }
        if self.functions.is_empty() || self.dims.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("functions, dims and seeds must be non-empty".into()));
        }
        if self.test_size == 0 || self.data_size < 2 {
            return Err(Error::Config("test and data sizes must be positive".into()));
        }
        for b in [&self.surrogate, &self.tandem, &self.fcgan] {
            b.with_seed(0).validate()?;
        }
        self.optimizer.params(0).validate()?;
        if self.case == 2 {
            for &w in self.case2.w_fnn.iter().chain([&self.case2.demo_w_fnn]) {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Config(format!("w_fnn {w} outside [0, 1]")));
                }
            }
            if self.case2.diversity_samples < 2 || self.case2.demo_count == 0 {
                return Err(Error::Config(
                    "diversity needs at least 2 samples and the demo at least 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// SHA-256 of the configuration without the artifact policy.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.artifacts = ArtifactPolicy::default();
        sha256_json(&c)
    }
}

pub(crate) fn sha256_json<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("plain data serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}
