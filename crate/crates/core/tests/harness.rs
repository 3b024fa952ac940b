use std::path::Path;

use invbench::bench::{BenchmarkFn, BenchmarkKind, TestFunction};
use invbench::harness::{run_case, CaseConfig, NetBudget};
use invbench::nn::Activation;

fn tiny(case: u8) -> CaseConfig {
    let mut cfg = CaseConfig::standard(case).unwrap();
    let budget = NetBudget {
        learning_rate: 1e-3,
        max_epochs: 3,
        batch_size: 64,
        early_stop_patience: 3,
    };
    cfg.surrogate = budget;
    cfg.tandem = budget;
    cfg.fcgan = budget;
    cfg.data_size = 200;
    cfg.test_size = 8;
    cfg.optimizer.num_initial = 4;
    cfg.optimizer.max_iterations = 5;
    cfg.seeds = vec![1];
    cfg.case2.diversity_samples = 3;
    cfg.case2.demo_count = 5;
    cfg.case4.sizes = vec![100, 400];
    cfg.case4.ratios = vec![0.0, 1.0];
    cfg.case4.pool_size = 150;
    cfg
}

fn read(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn case1_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(1);
    cfg.dims = vec![2, 10];
    let out = run_case(&cfg, dir.path()).unwrap();
    assert!(out.all_completed(), "{:?}", out.failed);
    let results = read(&dir.path().join("case1_results.csv"));
    assert_eq!(results.len(), 2 * 2 * 5);
    let runs = read(&dir.path().join("case1_runs.csv"));
    assert_eq!(runs.len(), 20);
    for r in &runs {
        let cost: f64 = r[5].parse().unwrap();
        match &r[2] {
            "tn" | "fcgan" => assert_eq!(cost, 1.0),
            "sqp" => assert!((1.0..=20.0).contains(&cost), "{r:?}"),
            _ => assert!((1.0..=5.0).contains(&cost), "{r:?}"),
        }
        assert!(r[4].parse::<f64>().unwrap() >= 0.0);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["case"], 1);
    assert_eq!(manifest["cells"].as_array().unwrap().len(), 20);
    assert_eq!(manifest["config_hash"].as_str().unwrap(), cfg.hash());
}

#[test]
fn case2_sweeps_five_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_case(&tiny(2), dir.path()).unwrap();
    assert!(out.all_completed(), "{:?}", out.failed);
    let rows = read(&dir.path().join("case2_results.csv"));
    assert_eq!(rows.len(), 5);
    let w: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(w, vec![0.3, 0.4, 0.5, 0.6, 0.7]);
    for r in &rows {
        let (a, b): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((a + b - 1.0).abs() < 1e-12);
    }
    let samples = read(&dir.path().join("case2_samples_rosenbrock_2.csv"));
    assert_eq!(samples.len(), 5);
}

#[test]
fn case3_bounded_variants_never_violate() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(3);
    cfg.functions = vec![BenchmarkKind::StyblinskiTang];
    let out = run_case(&cfg, dir.path()).unwrap();
    assert!(out.all_completed(), "{:?}", out.failed);
    let rows = read(&dir.path().join("case3_results.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        if &r[2] != Activation::Identity.name() {
            assert_eq!(r[6].parse::<f64>().unwrap(), 0.0);
        }
    }
    let xhat = read(&dir.path().join("case3_xhat.csv"));
    assert_eq!(xhat.len(), 3 * 8 * 2);
}

#[test]
fn case4_covers_the_grid_and_is_reproducible() {
    let cfg = tiny(4);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_case(&cfg, a.path()).unwrap().all_completed());
    assert!(run_case(&cfg, b.path()).unwrap().all_completed());
    let rows = read(&a.path().join("case4_results.csv"));
    assert_eq!(rows.len(), 2 * 2 * 2);
    for r in &rows {
        let n: usize = r[2].parse().unwrap();
        let (o, g): (usize, usize) = (r[5].parse().unwrap(), r[6].parse().unwrap());
        assert_eq!(o + g, n);
    }
    for file in ["case4_results.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn cached_artifacts_are_reused_and_missing_ones_fail_without_build() {
    let art = tempfile::tempdir().unwrap();
    let mut cfg = tiny(3);
    cfg.case3.variants = vec![Activation::TanhBc];
    cfg.artifacts.dir = Some(art.path().to_path_buf());
    let first = tempfile::tempdir().unwrap();
    assert!(run_case(&cfg, first.path()).unwrap().all_completed());

    cfg.artifacts.build = false;
    let second = tempfile::tempdir().unwrap();
    assert!(run_case(&cfg, second.path()).unwrap().all_completed());
    assert_eq!(
        std::fs::read(first.path().join("case3_results.csv")).unwrap(),
        std::fs::read(second.path().join("case3_results.csv")).unwrap()
    );

    cfg.seeds = vec![7];
    let third = tempfile::tempdir().unwrap();
    let out = run_case(&cfg, third.path()).unwrap();
    assert!(!out.all_completed());
    let rows = read(&third.path().join("case3_results.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[8] == "failed"));
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(1);
    cfg.case = 9;
    assert!(run_case(&cfg, dir.path()).is_err());
    let mut cfg = tiny(2);
    cfg.case2.w_fnn = vec![1.5];
    assert!(run_case(&cfg, dir.path()).is_err());
}

#[test]
fn config_round_trips_through_json() {
    let cfg = tiny(4);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: CaseConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let partial: CaseConfig = serde_json::from_str(r#"{"case": 3, "dims": [2]}"#).unwrap();
    assert_eq!(partial.case, 3);
    assert_eq!(partial.data_size, 10_000);
    let f = BenchmarkFn::rosenbrock(2).unwrap();
    assert_eq!(f.dim(), 2);
}
