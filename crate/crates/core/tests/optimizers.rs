use invbench::bench::{BenchmarkFn, Bounds, Dataset, Provenance, ScalerPair, TestFunction};
use invbench::nn::{Activation, Dense, History, NeuralNet, Tensor2};
use invbench::optim::{
    bp_optimize, ga_optimize, optimize, sqp_local, sqp_optimize, FunctionTarget, Method,
    Objective, OptParams, OptProblem,
};
use invbench::surrogate::SurrogateModel;
use invbench::Result;
use proptest::prelude::*;

const ST_MIN_2D: f64 = -78.332;

/// `(x − c)ᵀ(x − c)` on a box.
struct Quadratic {
    c: Vec<f64>,
    bounds: Bounds,
}

impl Objective for Quadratic {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn values(&self, x: &Tensor2) -> Result<Vec<f64>> {
        Ok(x.iter_rows()
            .map(|r| r.iter().zip(&self.c).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect())
    }

    fn values_and_grads(&self, x: &Tensor2) -> Result<(Vec<f64>, Tensor2)> {
        let mut g = x.clone();
        for r in 0..x.rows() {
            for (j, v) in g.row_mut(r).iter_mut().enumerate() {
                *v = 2.0 * (*v - self.c[j]);
            }
        }
        Ok((self.values(x)?, g))
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Surrogate whose prediction is the mean of the scaled inputs, built by hand
/// so the optimum is known.
fn mean_surrogate(dim: usize) -> SurrogateModel {
    let w = Tensor2::filled(dim, 1, 1.0 / dim as f64);
    let layer = Dense::new(w, vec![0.0], Activation::Identity).unwrap();
    let net = NeuralNet::from_layers(vec![layer], 0.0).unwrap();
    let bounds = Bounds::uniform(dim, 0.0, 1.0);
    let x = Tensor2::from_rows(&[vec![0.0; dim], vec![1.0; dim]]).unwrap();
    let ds = Dataset::new(x, vec![-1.0, 1.0], vec![Provenance::Observed; 2]).unwrap();
    let mut scalers = ScalerPair::fit(&ds, &bounds).unwrap();
    scalers.y_mean = 0.0;
    scalers.y_std = 1.0;
    SurrogateModel {
        net,
        scalers,
        benchmark: BenchmarkFn::styblinski_tang(dim).unwrap(),
        history: History::default(),
    }
}

#[test]
fn ga_reaches_the_styblinski_minimum() {
    let f = BenchmarkFn::styblinski_tang(2).unwrap();
    let obj = FunctionTarget::new(f, ST_MIN_2D);
    let best: Vec<f64> = (0..5)
        .map(|s| {
            let r = ga_optimize(&obj, ST_MIN_2D, &OptParams::new(s)).unwrap();
            f.eval(&r.x_star).unwrap()
        })
        .collect();
    let m = median(best.clone());
    assert!((m - ST_MIN_2D).abs() < 1e-1, "{best:?}");
}

#[test]
fn ga_on_rosenbrock_gets_below_one() {
    let f = BenchmarkFn::rosenbrock(2).unwrap();
    let obj = FunctionTarget::new(f, 0.0);
    let vals: Vec<f64> = (0..5)
        .map(|s| ga_optimize(&obj, 0.0, &OptParams::new(s)).unwrap().objective)
        .collect();
    assert!(median(vals.clone()) < 1.0, "{vals:?}");
}

#[test]
fn ga_trace_is_monotone_and_budgeted() {
    let f = BenchmarkFn::styblinski_tang(5).unwrap();
    let obj = FunctionTarget::new(f, -150.0);
    for s in 0..3 {
        let r = ga_optimize(&obj, -150.0, &OptParams::new(s)).unwrap();
        assert!(r.cost <= 100 && r.cost >= 1);
        assert_eq!(r.trace.len(), r.cost);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(f.bounds().contains(&r.x_star));
    }
}

#[test]
fn sqp_finds_interior_quadratic_minimum() {
    let q = Quadratic {
        c: vec![0.7, -1.3],
        bounds: Bounds::uniform(2, -2.0, 2.0),
    };
    let run = sqp_local(&q, &[1.9, 1.9], 100, &Default::default()).unwrap();
    assert!(run.accepted <= 20, "{}", run.accepted);
    for (a, b) in run.x.iter().zip(&q.c) {
        assert!((a - b).abs() < 1e-6, "{:?}", run.x);
    }
}

#[test]
fn sqp_projects_exterior_minimum() {
    let q = Quadratic {
        c: vec![3.0, -0.5, -7.0],
        bounds: Bounds::uniform(3, -2.0, 2.0),
    };
    let r = sqp_optimize(&q, 0.0, &OptParams::new(1)).unwrap();
    for (a, b) in r.x_star.iter().zip([2.0, -0.5, -2.0]) {
        assert!((a - b).abs() < 1e-6, "{:?}", r.x_star);
    }
    assert!(r.cost <= 1000);
}

#[test]
fn sqp_steps_decrease_and_stay_feasible() {
    let f = BenchmarkFn::styblinski_tang(4).unwrap();
    let obj = FunctionTarget::new(f, -120.0);
    for x0 in [[4.0, -4.0, 1.0, 0.5], [-1.0, 2.0, 3.0, -4.9]] {
        let run = sqp_local(&obj, &x0, 100, &Default::default()).unwrap();
        assert!(run.trace.windows(2).all(|w| w[1] < w[0]), "{:?}", run.trace);
        assert!(run.iterates.iter().all(|x| f.bounds().contains(x)));
    }
}

#[test]
fn bp_solves_a_reachable_linear_target() {
    let m = mean_surrogate(1);
    let p = OptProblem::new(&m, 0.3).unwrap();
    let r = bp_optimize(&p, 0.3, &OptParams::new(0)).unwrap();
    assert!(r.objective < 1e-3, "{r:?}");
    assert!(r.x_star[0] >= 0.0 && r.x_star[0] <= 1.0);
}

#[test]
fn bp_cost_does_not_depend_on_dimension() {
    for d in [2, 10, 30] {
        let m = mean_surrogate(d);
        let p = OptProblem::new(&m, 5.0).unwrap();
        let r = bp_optimize(&p, 5.0, &OptParams::new(3)).unwrap();
        assert_eq!(r.cost, 100);
        assert!(r.x_star.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn kink_convention_on_a_surrogate() {
    let m = mean_surrogate(2);
    let p = OptProblem::new(&m, 0.5).unwrap();
    let (v, g) = p
        .values_and_grads(&Tensor2::from_rows(&[vec![0.25, 0.75]]).unwrap())
        .unwrap();
    assert_eq!(v[0], 0.0);
    assert_eq!(g.as_slice(), &[0.0, 0.0]);
}

#[test]
fn identical_seeds_identical_results() {
    let f = BenchmarkFn::rosenbrock(3).unwrap();
    let obj = FunctionTarget::new(f, 100.0);
    for method in Method::ALL {
        let a = optimize(method, &obj, 100.0, &OptParams::new(11)).unwrap();
        let b = optimize(method, &obj, 100.0, &OptParams::new(11)).unwrap();
        assert_eq!(a, b);
        assert!(f.bounds().contains(&a.x_star));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn objective_gradient_matches_finite_differences(
        x in prop::collection::vec(-4.5f64..4.5, 3),
        t in -200.0f64..100.0,
    ) {
        let f = BenchmarkFn::styblinski_tang(3).unwrap();
        let obj = FunctionTarget::new(f, t);
        let (v, g) = obj.values_and_grads(&Tensor2::from_rows(std::slice::from_ref(&x)).unwrap()).unwrap();
        prop_assume!(v[0] > 1e-2);
        let h = 1e-5;
        for j in 0..3 {
            let (mut up, mut dn) = (x.clone(), x.clone());
            up[j] += h;
            dn[j] -= h;
            let fd = (obj.value(&up).unwrap() - obj.value(&dn).unwrap()) / (2.0 * h);
            let an = g.get(0, j);
            prop_assert!((fd - an).abs() <= 1e-4 * fd.abs().max(an.abs()).max(1e-3));
        }
    }

    #[test]
    fn objective_is_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        // The mean surrogate predicts ŷ = x in one dimension, so swapping
        // input and target swaps ŷ and y_t.
        let m = mean_surrogate(1);
        let va = OptProblem::new(&m, a).unwrap().value(&[b]).unwrap();
        let vb = OptProblem::new(&m, b).unwrap().value(&[a]).unwrap();
        prop_assert_eq!(va, vb);
    }
}
