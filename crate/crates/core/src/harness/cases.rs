//! Drivers for the four case studies.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::artifacts::{ArtifactRecord, ArtifactStore};
use super::config::{CaseConfig, MethodKind};
use super::eval::{evaluate, evaluate_designs, EvaluationReport, FcganDesigner, OptimizerDesigner, TestSet};
use crate::bench::{
    build_dataset, compose_dataset, split, BenchmarkFn, DataCompositionSpec, Dataset,
    Provenance, TestFunction,
};
use crate::error::{Error, Result};
use crate::inverse::{
    diversity, samples_csv, train_fcgan, train_tandem, FcganModel, LossWeights, TandemModel,
};
use crate::nn::{Activation, TrainConfig};
use crate::numfmt::{derive_seed, fmt17};
use crate::surrogate::{train_surrogate, SurrogateModel, TRAIN_FRACTION};

/// Files written by a case run and the cells that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub files: Vec<PathBuf>,
    pub cells: usize,
    pub failed: Vec<String>,
}

impl CaseOutcome {
    pub fn all_completed(&self) -> bool {
        self.failed.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
struct CellRecord {
    id: String,
    seed: u64,
    status: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    case: u8,
    version: &'static str,
    config_hash: String,
    config: &'a CaseConfig,
    cells: &'a [CellRecord],
    artifacts: Vec<ArtifactRecord>,
    outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
enum DataKey {
    Lhs { n: usize, seed: u64 },
    Composed(DataCompositionSpec),
}

#[derive(Serialize)]
struct SurrogateKey {
    function: BenchmarkFn,
    data: DataKey,
    train: TrainConfig,
}

#[derive(Serialize)]
struct TandemKey<'a> {
    surrogate: &'a str,
    data: DataKey,
    split_seed: u64,
    train: TrainConfig,
    bc: Activation,
}

#[derive(Serialize)]
struct FcganKey<'a> {
    surrogate: &'a str,
    data: DataKey,
    split_seed: u64,
    train: TrainConfig,
    weights: LossWeights,
    bc: Activation,
}

/// A table written through the `csv` crate; floats use 17 significant
/// digits and a failed cell leaves its metric fields empty.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn num(v: f64) -> String {
    fmt17(v)
}

fn blanks(n: usize) -> Vec<String> {
    vec![String::new(); n]
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

struct Runner<'a> {
    cfg: &'a CaseConfig,
    out_dir: PathBuf,
    store: ArtifactStore,
    cells: Vec<CellRecord>,
    files: Vec<PathBuf>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a CaseConfig, out_dir: &Path) -> Result<Self> {
        cfg.validate()?;
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let art_dir = cfg
            .artifacts
            .dir
            .clone()
            .unwrap_or_else(|| out_dir.join("artifacts"));
        Ok(Self {
            cfg,
            out_dir: out_dir.to_path_buf(),
            store: ArtifactStore::new(art_dir, cfg.artifacts.build)?,
            cells: Vec::new(),
            files: Vec::new(),
        })
    }

    fn benchmarks(&self) -> Result<Vec<BenchmarkFn>> {
        let mut out = Vec::new();
        for &kind in &self.cfg.functions {
            for &d in &self.cfg.dims {
                out.push(BenchmarkFn::new(kind, d)?);
            }
        }
        Ok(out)
    }

    fn reference_data_key(&self, f: &BenchmarkFn) -> DataKey {
        DataKey::Lhs {
            n: self.cfg.data_size,
            seed: derive_seed(self.cfg.surrogate_seed, &["data", f.name(), &f.dim().to_string()]),
        }
    }

    fn dataset(&self, f: &BenchmarkFn, key: &DataKey) -> Result<Dataset> {
        match key {
            DataKey::Lhs { n, seed } => build_dataset(f, *n, *seed),
            DataKey::Composed(spec) => compose_dataset(f, spec),
        }
    }

    fn surrogate(&self, f: &BenchmarkFn, data: DataKey, seed: u64) -> Result<(SurrogateModel, String)> {
        let key = SurrogateKey {
            function: *f,
            train: self.cfg.surrogate.with_seed(seed),
            data,
        };
        self.store.obtain(
            "surrogate",
            &key,
            SurrogateModel::load,
            || train_surrogate(&self.dataset(f, &key.data)?, *f, &key.train),
            |m, p| m.save(p),
        )
    }

    /// The surrogate trained on the shared reference dataset.
    fn reference_surrogate(&self, f: &BenchmarkFn) -> Result<(SurrogateModel, String)> {
        let seed = derive_seed(self.cfg.surrogate_seed, &["surrogate", f.name(), &f.dim().to_string()]);
        self.surrogate(f, self.reference_data_key(f), seed)
    }

    fn tandem(
        &self,
        surrogate: &(SurrogateModel, String),
        data: DataKey,
        seed: u64,
        bc: Activation,
    ) -> Result<TandemModel> {
        let key = TandemKey {
            surrogate: &surrogate.1,
            split_seed: derive_seed(seed, &["split"]),
            train: self.cfg.tandem.with_seed(seed),
            bc,
            data,
        };
        let f = surrogate.0.benchmark;
        self.store
            .obtain(
                "tandem",
                &key,
                TandemModel::load,
                || {
                    let ds = self.dataset(&f, &key.data)?;
                    let (tr, va) = split(&ds, TRAIN_FRACTION, key.split_seed)?;
                    train_tandem(&surrogate.0, &tr, &va, &key.train, bc)
                },
                |m, p| m.save(p),
            )
            .map(|(m, _)| m)
    }

    fn fcgan(
        &self,
        surrogate: &(SurrogateModel, String),
        data: DataKey,
        seed: u64,
        weights: LossWeights,
    ) -> Result<FcganModel> {
        let key = FcganKey {
            surrogate: &surrogate.1,
            split_seed: derive_seed(seed, &["split"]),
            train: self.cfg.fcgan.with_seed(seed),
            weights,
            bc: Activation::Identity,
            data,
        };
        let f = surrogate.0.benchmark;
        self.store
            .obtain(
                "fcgan",
                &key,
                FcganModel::load,
                || {
                    let ds = self.dataset(&f, &key.data)?;
                    let (tr, _) = split(&ds, TRAIN_FRACTION, key.split_seed)?;
                    train_fcgan(&surrogate.0, &tr, &key.train, weights, key.bc)
                },
                |m, p| m.save(p),
            )
            .map(|(m, _)| m)
    }

    fn test_set(&self, f: &BenchmarkFn, seed: u64) -> Result<TestSet> {
        TestSet::sample(
            f,
            self.cfg.test_size,
            derive_seed(seed, &["test", f.name(), &f.dim().to_string()]),
        )
    }

    fn record(&mut self, id: String, seed: u64, outcome: &Result<()>) {
        self.cells.push(CellRecord {
            id,
            seed,
            status: match outcome {
                Ok(()) => "ok".into(),
                Err(e) => format!("failed: {e}"),
            },
        });
    }

    fn write(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.out_dir.join(name);
        table.write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self) -> Result<CaseOutcome> {
        let mut outputs: Vec<String> = self
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        outputs.push("manifest.json".into());
        let manifest = Manifest {
            case: self.cfg.case,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: self.cfg.hash(),
            config: self.cfg,
            cells: &self.cells,
            artifacts: self.store.records(),
            outputs,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        self.write_text("manifest.json", &text)?;
        let failed = self
            .cells
            .iter()
            .filter(|c| c.status != "ok")
            .map(|c| format!("{}: {}", c.id, c.status))
            .collect();
        Ok(CaseOutcome {
            files: self.files,
            cells: self.cells.len(),
            failed,
        })
    }
}

fn status(r: &Result<()>) -> String {
    match r {
        Ok(()) => "ok".into(),
        Err(_) => "failed".into(),
    }
}

/// Runs the case selected by `cfg.case`, writing CSVs and `manifest.json`
/// into `out_dir`.
pub fn run_case(cfg: &CaseConfig, out_dir: &Path) -> Result<CaseOutcome> {
    let mut runner = Runner::new(cfg, out_dir)?;
    match cfg.case {
        1 => case1(&mut runner)?,
        2 => case2(&mut runner)?,
        3 => case3(&mut runner)?,
        4 => case4(&mut runner)?,
        other => return Err(Error::Config(format!("unknown case {other}"))),
    }
    runner.finish()
}

/// The reference surrogate for `f` under `cfg`, loaded from or trained into
/// the artifact store at `artifacts`; the same model every case uses.
pub fn reference_surrogate(
    cfg: &CaseConfig,
    f: &BenchmarkFn,
    artifacts: &Path,
) -> Result<SurrogateModel> {
    let runner = Runner {
        cfg,
        out_dir: artifacts.to_path_buf(),
        store: ArtifactStore::new(artifacts.to_path_buf(), cfg.artifacts.build)?,
        cells: Vec::new(),
        files: Vec::new(),
    };
    Ok(runner.reference_surrogate(f)?.0)
}

fn report_fields(r: &EvaluationReport) -> Vec<String> {
    vec![
        num(r.loss),
        num(r.cost),
        num(r.bound_violation),
        num(r.y_real_rmse),
    ]
}

fn case1(run: &mut Runner) -> Result<()> {
    let cfg = run.cfg;
    let mut runs = Table::new(&[
        "function", "dim", "method", "seed", "loss", "cost", "bound_violation", "y_real_rmse",
        "status",
    ]);
    let mut results = Table::new(&[
        "function", "dim", "method", "seeds", "loss_median", "cost_median", "status",
    ]);
    for f in run.benchmarks()? {
        let (name, d) = (f.name().to_string(), f.dim().to_string());
        let surrogate = run.reference_surrogate(&f);
        for &method in &cfg.case1.methods {
            let mut losses = Vec::new();
            let mut costs = Vec::new();
            let mut all_ok = true;
            for &seed in &cfg.seeds {
                let cell_seed = derive_seed(seed, &["case1", &name, &d, method.name()]);
                let mut report = None;
                let outcome = (|| -> Result<()> {
                    let surrogate = surrogate.as_ref().map_err(clone_err)?;
                    let test = run.test_set(&f, seed)?;
                    let data = run.reference_data_key(&f);
                    let r = match method {
                        MethodKind::Tn => {
                            let tn = run.tandem(surrogate, data, derive_seed(seed, &["tn", &name, &d]), Activation::Identity)?;
                            evaluate(&tn, &surrogate.0, &test)?
                        }
                        MethodKind::Fcgan => {
                            let w = LossWeights::complementary(cfg.case1.fcgan_w_fnn)?;
                            let g = run.fcgan(surrogate, data, derive_seed(seed, &["fcgan", &name, &d]), w)?;
                            evaluate(&FcganDesigner { model: &g, seed: cell_seed }, &surrogate.0, &test)?
                        }
                        _ => {
                            let m = method.optimizer().expect("optimizer method");
                            let designer = OptimizerDesigner {
                                method: m,
                                surrogate: &surrogate.0,
                                params: cfg.optimizer.params(cell_seed),
                            };
                            evaluate(&designer, &surrogate.0, &test)?
                        }
                    };
                    report = Some(r);
                    Ok(())
                })();
                let mut row = vec![name.clone(), d.clone(), method.name().into(), seed.to_string()];
                match &report {
                    Some(r) => {
                        row.extend(report_fields(r));
                        losses.push(r.loss);
                        costs.push(r.cost);
                    }
                    None => {
                        row.extend(blanks(4));
                        all_ok = false;
                    }
                }
                row.push(status(&outcome));
                runs.push(row);
                run.record(format!("case1/{name}/{d}/{}/{seed}", method.name()), cell_seed, &outcome);
            }
            let mut row = vec![name.clone(), d.clone(), method.name().into(), losses.len().to_string()];
            if losses.is_empty() {
                row.extend(blanks(2));
            } else {
                row.push(num(median(&losses)));
                row.push(num(median(&costs)));
            }
            row.push(if all_ok { "ok".into() } else { "failed".into() });
            results.push(row);
        }
    }
    run.write("case1_runs.csv", &runs)?;
    run.write("case1_results.csv", &results)
}

fn case2(run: &mut Runner) -> Result<()> {
    let cfg = run.cfg;
    let mut results = Table::new(&[
        "function", "dim", "w_fnn", "w_adv", "seed", "loss", "diversity", "y_real_rmse", "status",
    ]);
    let mut summary = Table::new(&[
        "function", "dim", "w_fnn", "w_adv", "seeds", "loss_mean", "diversity_mean",
        "y_real_rmse_mean",
    ]);
    let mut samples = Vec::new();
    for f in run.benchmarks()? {
        let (name, d) = (f.name().to_string(), f.dim().to_string());
        let surrogate = run.reference_surrogate(&f);
        for &w_fnn in &cfg.case2.w_fnn {
            let (mut ls, mut ds, mut rs) = (Vec::new(), Vec::new(), Vec::new());
            let weights = LossWeights::complementary(w_fnn)?;
            for &seed in &cfg.seeds {
                let cell_seed = derive_seed(seed, &["case2", &name, &d, &num(w_fnn)]);
                let mut metrics = None;
                let outcome = (|| -> Result<()> {
                    let surrogate = surrogate.as_ref().map_err(clone_err)?;
                    let test = run.test_set(&f, seed)?;
                    let g = run.fcgan(surrogate, run.reference_data_key(&f), derive_seed(seed, &["fcgan", &name, &d]), weights)?;
                    let r = evaluate(&FcganDesigner { model: &g, seed: cell_seed }, &surrogate.0, &test)?;
                    let mut div = Vec::with_capacity(test.len());
                    for (i, &t) in test.y.iter().enumerate() {
                        let x = g.generate(t, cfg.case2.diversity_samples, derive_seed(cell_seed, &["diversity", &i.to_string()]))?;
                        div.push(diversity(&x, &f.bounds())?);
                    }
                    metrics = Some((r.loss, mean(&div), r.y_real_rmse));
                    Ok(())
                })();
                let mut row = vec![name.clone(), d.clone(), num(weights.w_fnn), num(weights.w_adv), seed.to_string()];
                match metrics {
                    Some((l, dv, rr)) => {
                        row.extend([num(l), num(dv), num(rr)]);
                        ls.push(l);
                        ds.push(dv);
                        rs.push(rr);
                    }
                    None => row.extend(blanks(3)),
                }
                row.push(status(&outcome));
                results.push(row);
                run.record(format!("case2/{name}/{d}/w_fnn={w_fnn}/{seed}"), cell_seed, &outcome);
            }
            let mut row = vec![name.clone(), d.clone(), num(weights.w_fnn), num(weights.w_adv), ls.len().to_string()];
            if ls.is_empty() {
                row.extend(blanks(3));
            } else {
                row.extend([num(mean(&ls)), num(mean(&ds)), num(mean(&rs))]);
            }
            summary.push(row);
        }

        let seed = cfg.seeds[0];
        let demo_seed = derive_seed(seed, &["case2-demo", &name, &d]);
        let outcome = (|| -> Result<String> {
            let surrogate = surrogate.as_ref().map_err(clone_err)?;
            let weights = LossWeights::complementary(cfg.case2.demo_w_fnn)?;
            let g = run.fcgan(surrogate, run.reference_data_key(&f), derive_seed(seed, &["fcgan", &name, &d]), weights)?;
            let x = g.generate(cfg.case2.demo_target, cfg.case2.demo_count, demo_seed)?;
            samples_csv(&surrogate.0, cfg.case2.demo_target, &x)
        })();
        let unit = outcome.as_ref().map(|_| ()).map_err(clone_err);
        run.record(format!("case2/{name}/{d}/demo"), demo_seed, &unit);
        if let Ok(text) = outcome {
            samples.push((format!("case2_samples_{name}_{d}.csv"), text));
        }
    }
    run.write("case2_results.csv", &results)?;
    run.write("case2_summary.csv", &summary)?;
    for (file, text) in samples {
        run.write_text(&file, &text)?;
    }
    Ok(())
}

fn case3(run: &mut Runner) -> Result<()> {
    let cfg = run.cfg;
    let mut results = Table::new(&[
        "function", "dim", "variant", "seed", "loss", "y_real_rmse", "bound_violation",
        "component_violation", "status",
    ]);
    let mut xhat = Table::new(&["function", "dim", "variant", "seed", "target_idx", "coord", "value"]);
    for f in run.benchmarks()? {
        let (name, d) = (f.name().to_string(), f.dim().to_string());
        let surrogate = run.reference_surrogate(&f);
        for &bc in &cfg.case3.variants {
            for &seed in &cfg.seeds {
                let tn_seed = derive_seed(seed, &["tn", &name, &d]);
                let mut out = None;
                let outcome = (|| -> Result<()> {
                    let surrogate = surrogate.as_ref().map_err(clone_err)?;
                    let test = run.test_set(&f, seed)?;
                    let tn = run.tandem(surrogate, run.reference_data_key(&f), tn_seed, bc)?;
                    out = Some(evaluate_designs(&tn, &surrogate.0, &test)?);
                    Ok(())
                })();
                let mut row = vec![name.clone(), d.clone(), bc.name().into(), seed.to_string()];
                match &out {
                    Some((r, x)) => {
                        row.extend([
                            num(r.loss),
                            num(r.y_real_rmse),
                            num(r.bound_violation),
                            num(r.component_violation),
                        ]);
                        for (i, rowx) in x.iter_rows().enumerate() {
                            for (j, v) in rowx.iter().enumerate() {
                                xhat.push(vec![
                                    name.clone(),
                                    d.clone(),
                                    bc.name().into(),
                                    seed.to_string(),
                                    i.to_string(),
                                    (j + 1).to_string(),
                                    num(*v),
                                ]);
                            }
                        }
                    }
                    None => row.extend(blanks(4)),
                }
                row.push(status(&outcome));
                results.push(row);
                run.record(format!("case3/{name}/{d}/{}/{seed}", bc.name()), tn_seed, &outcome);
            }
        }
    }
    run.write("case3_results.csv", &results)?;
    run.write("case3_xhat.csv", &xhat)
}

fn case4(run: &mut Runner) -> Result<()> {
    let cfg = run.cfg;
    let mut results = Table::new(&[
        "function", "dim", "n", "eta", "seed", "n_observed", "n_augmented", "loss", "y_real_rmse",
        "status",
    ]);
    for f in run.benchmarks()? {
        let (name, d) = (f.name().to_string(), f.dim().to_string());
        let reference = run.reference_surrogate(&f);
        for &seed in &cfg.seeds {
            for &n in &cfg.case4.sizes {
                for &eta in &cfg.case4.ratios {
                    let tag = [name.as_str(), d.as_str(), &n.to_string(), &num(eta)];
                    let spec = DataCompositionSpec {
                        total_size: n,
                        real_ratio: eta,
                        pool_seed: derive_seed(seed, &["pool", &name, &d]),
                        draw_seed: derive_seed(seed, &[&["draw"][..], &tag[..]].concat()),
                        pool_size: cfg.case4.pool_size,
                        allow_top_up: true,
                    };
                    let cell_seed = derive_seed(seed, &[&["case4"][..], &tag[..]].concat());
                    let mut out = None;
                    let outcome = (|| -> Result<()> {
                        let reference = reference.as_ref().map_err(clone_err)?;
                        let test = run.test_set(&f, seed)?;
                        let data = DataKey::Composed(spec.clone());
                        let ds = run.dataset(&f, &data)?;
                        let cell_sur = run.surrogate(&f, data.clone(), derive_seed(cell_seed, &["surrogate"]))?;
                        let tn = run.tandem(&cell_sur, data, derive_seed(cell_seed, &["tn"]), Activation::Identity)?;
                        let r = evaluate(&tn, &reference.0, &test)?;
                        out = Some((ds.count(Provenance::Observed), ds.count(Provenance::Augmented), r));
                        Ok(())
                    })();
                    let mut row = vec![name.clone(), d.clone(), n.to_string(), num(eta), seed.to_string()];
                    match &out {
                        Some((o, a, r)) => row.extend([o.to_string(), a.to_string(), num(r.loss), num(r.y_real_rmse)]),
                        None => row.extend(blanks(4)),
                    }
                    row.push(status(&outcome));
                    results.push(row);
                    run.record(format!("case4/{name}/{d}/n={n}/eta={eta}/{seed}"), cell_seed, &outcome);
                }
            }
        }
    }
    run.write("case4_results.csv", &results)
}

/// Errors are not `Clone`; a shared failure is re-reported by message.
fn clone_err(e: &Error) -> Error {
    Error::Config(format!("prerequisite failed: {e}"))
}
