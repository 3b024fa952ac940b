//! Analytic benchmark functions and their box bounds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions used by the replication grid.
pub const REPLICATION_DIMS: [usize; 6] = [2, 10, 30, 50, 70, 100];

/// A test function with a box domain. Implement this to plug further
/// benchmark families into dataset generation.
pub trait TestFunction {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn bounds(&self) -> Bounds;
    fn eval(&self, x: &[f64]) -> Result<f64>;
}

/// Per-dimension lower and upper limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
        }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension("bound vectors differ in length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Input("every lower bound must be below its upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    /// Clamps `x` into the box.
    pub fn project(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    Rosenbrock,
    StyblinskiTang,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 2] = [BenchmarkKind::Rosenbrock, BenchmarkKind::StyblinskiTang];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Rosenbrock => "rosenbrock",
            BenchmarkKind::StyblinskiTang => "styblinski_tang",
        }
    }

    /// Symmetric box half-width: 2 for Rosenbrock, 5 for Styblinski-Tang.
    pub fn half_width(self) -> f64 {
        match self {
            BenchmarkKind::Rosenbrock => 2.0,
            BenchmarkKind::StyblinskiTang => 5.0,
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rosenbrock" => Ok(BenchmarkKind::Rosenbrock),
            "styblinski_tang" | "styblinski" | "stybtang" => Ok(BenchmarkKind::StyblinskiTang),
            other => Err(Error::Input(format!("unknown benchmark `{other}`"))),
        }
    }
}

/// A benchmark function at a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenchmarkFn {
    pub kind: BenchmarkKind,
    pub dim: usize,
}

impl BenchmarkFn {
    pub fn new(kind: BenchmarkKind, dim: usize) -> Result<Self> {
        let min = match kind {
            BenchmarkKind::Rosenbrock => 2,
            BenchmarkKind::StyblinskiTang => 1,
        };
        if dim < min {
            return Err(Error::Input(format!("{kind} needs at least {min} dimensions")));
        }
        Ok(Self { kind, dim })
    }

    pub fn rosenbrock(dim: usize) -> Result<Self> {
        Self::new(BenchmarkKind::Rosenbrock, dim)
    }

    pub fn styblinski_tang(dim: usize) -> Result<Self> {
        Self::new(BenchmarkKind::StyblinskiTang, dim)
    }
}

impl BenchmarkFn {
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "{} expects {} coordinates, got {}",
                self.kind,
                self.dim,
                x.len()
            )));
        }
        match self.kind {
            BenchmarkKind::Rosenbrock => rosenbrock_gradient(x),
            BenchmarkKind::StyblinskiTang => styblinski_tang_gradient(x),
        }
    }
}

impl TestFunction for BenchmarkFn {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn bounds(&self) -> Bounds {
        let h = self.kind.half_width();
        Bounds::uniform(self.dim, -h, h)
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "{} expects {} coordinates, got {}",
                self.kind,
                self.dim,
                x.len()
            )));
        }
        match self.kind {
            BenchmarkKind::Rosenbrock => rosenbrock(x),
            BenchmarkKind::StyblinskiTang => styblinski_tang(x),
        }
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("benchmark argument".into()));
    }
    Ok(())
}

/// `Σ 100(x_{i+1} − x_i²)² + (1 − x_i)²`; zero only at the all-ones vector.
pub fn rosenbrock(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::Input("rosenbrock needs at least 2 coordinates".into()));
    }
    check_finite(x)?;
    Ok(x
        .windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum())
}

/// `½ Σ (x_i⁴ − 16x_i² + 5x_i)`; separable, with minimum near
/// −39.166 per coordinate at x_i ≈ −2.9035.
pub fn styblinski_tang(x: &[f64]) -> Result<f64> {
    check_finite(x)?;
    Ok(0.5
        * x.iter()
            .map(|&v| v.powi(4) - 16.0 * v * v + 5.0 * v)
            .sum::<f64>())
}

/// Gradient of [`rosenbrock`].
pub fn rosenbrock_gradient(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::Input("rosenbrock needs at least 2 coordinates".into()));
    }
    check_finite(x)?;
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() - 1 {
        let r = x[i + 1] - x[i] * x[i];
        g[i] += -400.0 * x[i] * r - 2.0 * (1.0 - x[i]);
        g[i + 1] += 200.0 * r;
    }
    Ok(g)
}

/// Gradient of [`styblinski_tang`].
pub fn styblinski_tang_gradient(x: &[f64]) -> Result<Vec<f64>> {
    check_finite(x)?;
    Ok(x.iter().map(|&v| 2.0 * v.powi(3) - 16.0 * v + 2.5).collect())
}
