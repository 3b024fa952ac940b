use invbench::bench::{build_dataset, BenchmarkFn};
use invbench::nn::{Tensor2, TrainConfig};
use invbench::surrogate::{train_surrogate, SurrogateModel};

fn quick(f: BenchmarkFn) -> SurrogateModel {
    let ds = build_dataset(&f, 3000, 1).unwrap();
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        max_epochs: 60,
        batch_size: 64,
        early_stop_patience: 10,
        rng_seed: 2,
    };
    train_surrogate(&ds, f, &cfg).unwrap()
}

#[test]
fn short_training_explains_most_variance() {
    for f in [BenchmarkFn::rosenbrock(2).unwrap(), BenchmarkFn::styblinski_tang(2).unwrap()] {
        let s = quick(f);
        let m = s.evaluate(&build_dataset(&f, 100, 99).unwrap()).unwrap();
        assert!(m.r2 > 0.75, "{f:?}: {m:?}");
        assert!(s.history.best_epoch >= 1);
    }
}

#[test]
fn gradient_matches_the_prediction_slope() {
    let s = quick(BenchmarkFn::styblinski_tang(2).unwrap());
    let u = Tensor2::from_rows(&[vec![0.3, 0.7], vec![0.55, 0.2]]).unwrap();
    let (out, g) = s.gradient_scaled(&u).unwrap();
    assert_eq!(out, s.predict_scaled(&u).unwrap());
    let h = 1e-5;
    for r in 0..2 {
        for j in 0..2 {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up.set(r, j, u.get(r, j) + h);
            dn.set(r, j, u.get(r, j) - h);
            let fd = (s.predict_scaled(&up).unwrap()[r] - s.predict_scaled(&dn).unwrap()[r]) / (2.0 * h);
            assert!((fd - g.get(r, j)).abs() < 1e-4 * fd.abs().max(1.0));
        }
    }
}

#[test]
fn saved_surrogates_predict_identically() {
    let f = BenchmarkFn::rosenbrock(2).unwrap();
    let ds = build_dataset(&f, 200, 1).unwrap();
    let s = train_surrogate(&ds, f, &TrainConfig { max_epochs: 2, ..TrainConfig::surrogate(3) }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    s.save(&path).unwrap();
    let back = SurrogateModel::load(&path).unwrap();
    assert_eq!(back, s);
    let x = build_dataset(&f, 20, 5).unwrap().x;
    assert_eq!(back.predict(&x).unwrap(), s.predict(&x).unwrap());
}

#[test]
fn mismatched_data_is_rejected() {
    let ds = build_dataset(&BenchmarkFn::rosenbrock(3).unwrap(), 20, 1).unwrap();
    let f = BenchmarkFn::rosenbrock(2).unwrap();
    assert!(train_surrogate(&ds, f, &TrainConfig::surrogate(0)).is_err());
}
