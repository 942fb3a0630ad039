use serde::{Deserialize, Serialize};

use super::matrix::Matrix;

/// Which denominator turns the scatter matrix into a covariance estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Divide by `T`.
    #[default]
    Biased,
    /// Divide by `T - 1`.
    Unbiased,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Biased => "biased",
            Normalization::Unbiased => "unbiased",
        }
    }

    /// Denominator for `count` observations; `None` when the estimate is undefined.
    pub fn denominator(self, count: u64) -> Option<f64> {
        match self {
            Normalization::Biased if count >= 1 => Some(count as f64),
            Normalization::Unbiased if count >= 2 => Some((count - 1) as f64),
            _ => None,
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "biased" => Ok(Normalization::Biased),
            "unbiased" => Ok(Normalization::Unbiased),
            other => Err(format!("unknown normalization `{other}` (expected biased|unbiased)")),
        }
    }
}

/// One-pass (Welford) mean and scatter accumulator for d-vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamingCovariance {
    count: u64,
    mean: Vec<f64>,
    scatter: Matrix,
    delta: Vec<f64>,
}

impl StreamingCovariance {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            scatter: Matrix::zeros(dim),
            delta: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Sum of outer products of deviations from the running mean.
    pub fn scatter(&self) -> &Matrix {
        &self.scatter
    }

    pub fn update(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim(), "sample dimension mismatch");
        self.count += 1;
        let t = self.count as f64;
        for (i, (&xi, m)) in x.iter().zip(self.mean.iter_mut()).enumerate() {
            self.delta[i] = xi - *m;
            *m += self.delta[i] / t;
        }
        // (x - old mean)(x - new mean)ᵀ = δδᵀ (T-1)/T, kept symmetric
        let w = (t - 1.0) / t;
        let d = self.dim();
        for i in 0..d {
            let di = self.delta[i] * w;
            for j in i..d {
                let v = di * self.delta[j];
                self.scatter[(i, j)] += v;
                if j != i {
                    self.scatter[(j, i)] += v;
                }
            }
        }
    }

    pub fn covariance(&self, norm: Normalization) -> Option<Matrix> {
        norm.denominator(self.count)
            .map(|den| self.scatter.scale(1.0 / den))
    }

    /// Trace of the covariance estimate; zero while the estimate is undefined.
    pub fn trace_estimate(&self, norm: Normalization) -> f64 {
        norm.denominator(self.count)
            .map_or(0.0, |den| self.scatter.trace() / den)
    }
}
