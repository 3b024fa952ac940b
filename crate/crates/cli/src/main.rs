use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use invbench::bench::{
    build_dataset, compose_dataset, split, BenchmarkFn, BenchmarkKind, DataCompositionSpec,
    Dataset,
};
use invbench::harness::{run_case, CaseConfig, NetBudget};
use invbench::inverse::{samples_csv, train_fcgan, train_tandem, InverseModel, LossWeights};
use invbench::nn::{Activation, TrainConfig};
use invbench::numfmt::derive_seed;
use invbench::optim::{optimize, Method, OptParams, OptProblem};
use invbench::surrogate::{train_surrogate, SurrogateModel, TRAIN_FRACTION};

#[derive(Parser)]
#[command(name = "invbench", version, about = "Design optimization and inverse design benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label an LHS design with a benchmark function.
    GenData {
        #[arg(long)]
        function: BenchmarkKind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mix observed and augmented rows at real-data ratio `eta`.
    ComposeData {
        #[arg(long)]
        function: BenchmarkKind,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        pool_seed: u64,
        #[arg(long, default_value_t = 0)]
        draw_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    TrainSurrogate {
        #[arg(long)]
        function: BenchmarkKind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_history: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Train a tandem network through a frozen surrogate.
    TrainTn {
        #[arg(long)]
        surrogate: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = BcArg::None)]
        bc: BcArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    TrainFcgan {
        #[arg(long)]
        surrogate: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = BcArg::None)]
        bc: BcArg,
        /// Forward-model weight; the adversarial weight is `1 - w_fnn`.
        #[arg(long, default_value_t = 0.5)]
        w_fnn: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Draw designs for a target from a trained inverse model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        target: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Writes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search the surrogate for a design that hits the target.
    Optimize {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        target: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a case study.
    Bench {
        #[arg(value_enum)]
        case: CaseId,
        /// JSON CaseConfig; fields left out take the standard grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Use every reference dimension from 2 to 100.
        #[arg(long)]
        full_dims: bool,
    },
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
}

impl BudgetArgs {
    fn apply(&self, base: NetBudget, seed: u64) -> TrainConfig {
        let mut cfg = base.with_seed(seed);
        if let Some(v) = self.epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.patience {
            cfg.early_stop_patience = v;
        }
        cfg
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    None,
    Sigmoid,
    TanhBc,
}

impl BcArg {
    fn activation(self) -> Activation {
        match self {
            BcArg::None => Activation::Identity,
            BcArg::Sigmoid => Activation::Sigmoid,
            BcArg::TanhBc => Activation::TanhBc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseId {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl CaseId {
    fn number(self) -> u8 {
        match self {
            CaseId::Case1 => 1,
            CaseId::Case2 => 2,
            CaseId::Case3 => 3,
            CaseId::Case4 => 4,
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_data(path: &Path) -> Result<Dataset> {
    Dataset::read_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn load_surrogate(path: &Path) -> Result<SurrogateModel> {
    SurrogateModel::load(path).with_context(|| format!("loading surrogate {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenData {
            function,
            dim,
            n,
            seed,
            out,
        } => {
            let f = BenchmarkFn::new(function, dim)?;
            build_dataset(&f, n, seed)?.write_csv(&out)?;
        }
        Command::ComposeData {
            function,
            dim,
            n,
            eta,
            pool_seed,
            draw_seed,
            out,
        } => {
            let f = BenchmarkFn::new(function, dim)?;
            let spec = DataCompositionSpec::new(n, eta, pool_seed, draw_seed);
            compose_dataset(&f, &spec)?.write_csv(&out)?;
        }
        Command::TrainSurrogate {
            function,
            dim,
            data,
            seed,
            out_model,
            out_history,
            budget,
        } => {
            let f = BenchmarkFn::new(function, dim)?;
            let cfg = budget.apply(NetBudget::surrogate(), seed);
            let model = train_surrogate(&read_data(&data)?, f, &cfg)?;
            model.save(&out_model)?;
            if let Some(p) = out_history {
                write_out(Some(&p), &model.history.to_csv())?;
            }
            eprintln!(
                "trained {} epochs, kept epoch {}",
                model.history.epochs.len(),
                model.history.best_epoch
            );
        }
        Command::TrainTn {
            surrogate,
            data,
            bc,
            seed,
            out,
            budget,
        } => {
            let s = load_surrogate(&surrogate)?;
            let ds = read_data(&data)?;
            let (tr, va) = split(&ds, TRAIN_FRACTION, derive_seed(seed, &["split"]))?;
            let cfg = budget.apply(NetBudget::tandem(), seed);
            let tn = train_tandem(&s, &tr, &va, &cfg, bc.activation())?;
            tn.save(&out)?;
            eprintln!("validation chain mse {:.6}", tn.chain_mse(&va)?);
        }
        Command::TrainFcgan {
            surrogate,
            data,
            bc,
            w_fnn,
            seed,
            out,
            budget,
        } => {
            let s = load_surrogate(&surrogate)?;
            let ds = read_data(&data)?;
            let (tr, _) = split(&ds, TRAIN_FRACTION, derive_seed(seed, &["split"]))?;
            let cfg = budget.apply(NetBudget::fcgan(), seed);
            let weights = LossWeights::complementary(w_fnn)?;
            train_fcgan(&s, &tr, &cfg, weights, bc.activation())?.save(&out)?;
        }
        Command::Sample {
            model,
            target,
            count,
            seed,
            out,
        } => {
            let m = InverseModel::load(&model)
                .with_context(|| format!("loading {}", model.display()))?;
            let x = m.sample(target, count, seed)?;
            write_out(out.as_deref(), &samples_csv(m.surrogate(), target, &x)?)?;
        }
        Command::Optimize {
            method,
            model,
            target,
            seed,
            out,
        } => {
            let s = load_surrogate(&model)?;
            let problem = OptProblem::new(&s, target)?;
            let r = optimize(method, &problem, target, &OptParams::new(seed))?;
            write_out(out.as_deref(), &(r.to_json()? + "\n"))?;
        }
        Command::Bench {
            case,
            config,
            out_dir,
            full_dims,
        } => {
            let mut cfg = match config {
                Some(p) => {
                    let text = fs::read_to_string(&p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    let mut base = serde_json::from_value::<serde_json::Value>(
                        serde_json::to_value(CaseConfig::standard(case.number())?)?,
                    )?;
                    merge(&mut base, serde_json::from_str(&text)?);
                    serde_json::from_value::<CaseConfig>(base)
                        .with_context(|| format!("parsing {}", p.display()))?
                }
                None => CaseConfig::standard(case.number())?,
            };
            if cfg.case != case.number() {
                bail!("config is for case {} but case{} was requested", cfg.case, case.number());
            }
            if full_dims {
                cfg = cfg.with_full_dims();
            }
            let outcome = run_case(&cfg, &out_dir)?;
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            for f in &outcome.failed {
                eprintln!("failed {f}");
            }
            return Ok(outcome.all_completed());
        }
    }
    Ok(true)
}

/// Overlays the keys present in `patch` onto `base`, recursing into objects.
fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
