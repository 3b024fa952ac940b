//! Labelled design/performance pairs, scaling, splitting and CSV I/O.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::functions::{Bounds, TestFunction};
use super::lhs::lhs_sample;
use crate::error::{Error, Result};
use crate::nn::Tensor2;
use crate::numfmt::{exact_f64, exact_vec, fmt17};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    Augmented,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Observed => "observed",
            Provenance::Augmented => "augmented",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observed" => Ok(Provenance::Observed),
            "augmented" => Ok(Provenance::Augmented),
            other => Err(Error::Input(format!("unknown row tag `{other}`"))),
        }
    }
}

/// Design variables `x` (raw units, one row per sample) with performance
/// labels `y` and a provenance tag per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Tensor2,
    pub y: Vec<f64>,
    pub tags: Vec<Provenance>,
}

impl Dataset {
    pub fn new(x: Tensor2, y: Vec<f64>, tags: Vec<Provenance>) -> Result<Self> {
        if x.rows() != y.len() || y.len() != tags.len() {
            return Err(Error::Dimension(format!(
                "{} rows of x, {} labels and {} tags",
                x.rows(),
                y.len(),
                tags.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset label".into()));
        }
        Ok(Self { x, y, tags })
    }

    /// Labels every row of `x` with `f`.
    pub fn label(f: &dyn TestFunction, x: Tensor2, tag: Provenance) -> Result<Self> {
        let y = x.iter_rows().map(|r| f.eval(r)).collect::<Result<Vec<_>>>()?;
        let tags = vec![tag; y.len()];
        Self::new(x, y, tags)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            tags: idx.iter().map(|&i| self.tags[i]).collect(),
        }
    }

    /// Appends the rows of `other`.
    pub fn extend(&mut self, other: &Dataset) -> Result<()> {
        if self.dim() != other.dim() && !self.is_empty() {
            return Err(Error::Dimension("datasets differ in width".into()));
        }
        let mut data = std::mem::replace(&mut self.x, Tensor2::zeros(0, 0)).into_vec();
        data.extend_from_slice(other.x.as_slice());
        let cols = other.dim();
        self.x = Tensor2::from_vec(data.len() / cols.max(1), cols, data)?;
        self.y.extend_from_slice(&other.y);
        self.tags.extend_from_slice(&other.tags);
        Ok(())
    }

    pub fn count(&self, tag: Provenance) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }

    pub fn to_csv_string(&self) -> String {
        let d = self.dim();
        let mut s = String::new();
        for j in 1..=d {
            s.push_str(&format!("x{j},"));
        }
        s.push_str("y,tag\n");
        for (r, row) in self.x.iter_rows().enumerate() {
            for v in row {
                s.push_str(&fmt17(*v));
                s.push(',');
            }
            s.push_str(&fmt17(self.y[r]));
            s.push(',');
            s.push_str(&self.tags[r].to_string());
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let width = headers.len();
        if width < 3 || &headers[width - 2] != "y" || &headers[width - 1] != "tag" {
            return Err(Error::Input("dataset header must be x1,...,xD,y,tag".into()));
        }
        let d = width - 2;
        let (mut xs, mut ys, mut tags) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            for j in 0..d {
                xs.push(parse_f64(&rec[j])?);
            }
            ys.push(parse_f64(&rec[d])?);
            tags.push(rec[d + 1].parse()?);
        }
        Self::new(Tensor2::from_vec(ys.len(), d, xs)?, ys, tags)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(f)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Input(format!("`{s}` is not a number")))
}

/// LHS design over `f`'s bounds, labelled by `f`; every row is observed.
pub fn build_dataset(f: &dyn TestFunction, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Input("dataset size must be at least 1".into()));
    }
    let x = lhs_sample(n, &f.bounds(), seed);
    Dataset::label(f, x, Provenance::Observed)
}

/// Shuffled split into `round(n·ratio)` training rows and the remainder.
pub fn split(ds: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Input(format!("split ratio {ratio} must lie in (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (ds.len() as f64 * ratio).round() as usize;
    let (a, b) = idx.split_at(n_train);
    Ok((ds.subset(a), ds.subset(b)))
}

/// Min-max scaling of `x` against the declared bounds and standardisation
/// of `y` against training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerPair {
    #[serde(with = "exact_vec")]
    pub x_min: Vec<f64>,
    #[serde(with = "exact_vec")]
    pub x_max: Vec<f64>,
    #[serde(with = "exact_f64")]
    pub y_mean: f64,
    #[serde(with = "exact_f64")]
    pub y_std: f64,
}

impl ScalerPair {
    /// Fits the scalers: `x` from `bounds` (so scaled 0 and 1 are exactly the
    /// box faces), `y` from the mean and population standard deviation of
    /// `ds`.
    pub fn fit(ds: &Dataset, bounds: &Bounds) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::Input("cannot fit scalers on an empty dataset".into()));
        }
        if ds.dim() != bounds.dim() {
            return Err(Error::Dimension("dataset and bounds differ in width".into()));
        }
        let n = ds.len() as f64;
        let mean = ds.y.iter().sum::<f64>() / n;
        let var = ds.y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if !(var > 0.0) {
            return Err(Error::Input("labels have zero variance".into()));
        }
        Ok(Self {
            x_min: bounds.lower.clone(),
            x_max: bounds.upper.clone(),
            y_mean: mean,
            y_std: var.sqrt(),
        })
    }

    pub fn dim(&self) -> usize {
        self.x_min.len()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            lower: self.x_min.clone(),
            upper: self.x_max.clone(),
        }
    }

    pub fn scale_x_row(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..x.len() {
            out[j] = (x[j] - self.x_min[j]) / (self.x_max[j] - self.x_min[j]);
        }
    }

    pub fn unscale_x_row(&self, u: &[f64], out: &mut [f64]) {
        for j in 0..u.len() {
            out[j] = self.x_min[j] + u[j] * (self.x_max[j] - self.x_min[j]);
        }
    }

    pub fn scale_x(&self, x: &Tensor2) -> Result<Tensor2> {
        self.check_width(x)?;
        let mut out = x.clone();
        for r in 0..x.rows() {
            self.scale_x_row(x.row(r), out.row_mut(r));
        }
        Ok(out)
    }

    pub fn unscale_x(&self, u: &Tensor2) -> Result<Tensor2> {
        self.check_width(u)?;
        let mut out = u.clone();
        for r in 0..u.rows() {
            self.unscale_x_row(u.row(r), out.row_mut(r));
        }
        Ok(out)
    }

    #[inline]
    pub fn scale_y(&self, y: f64) -> f64 {
        (y - self.y_mean) / self.y_std
    }

    #[inline]
    pub fn unscale_y(&self, s: f64) -> f64 {
        s * self.y_std + self.y_mean
    }

    pub fn scale_y_column(&self, y: &[f64]) -> Tensor2 {
        let v: Vec<f64> = y.iter().map(|&v| self.scale_y(v)).collect();
        Tensor2::from_vec(v.len(), 1, v).expect("finite labels")
    }

    fn check_width(&self, x: &Tensor2) -> Result<()> {
        if x.cols() != self.dim() {
            return Err(Error::Dimension(format!(
                "scaler covers {} columns, got {}",
                self.dim(),
                x.cols()
            )));
        }
        Ok(())
    }
}
