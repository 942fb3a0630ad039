//! Log-log least squares for regret curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    #[default]
    None,
    /// Regress `ln reg − ½·ln ln n` to strip a `√log n` factor.
    Sqrtlog,
}

impl std::str::FromStr for Correction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Correction::None),
            "sqrtlog" => Ok(Correction::Sqrtlog),
            other => Err(format!("unknown correction `{other}` (expected none or sqrtlog)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// `(ln n, response)` pairs actually fitted.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub correction: Correction,
    /// Horizons dropped for non-positive regret.
    pub dropped: Vec<usize>,
}

impl SlopeFit {
    /// Fitted regret at horizon `n`, correction factor included.
    pub fn predict(&self, n: f64) -> f64 {
        let mut y = self.intercept + self.slope * n.ln();
        if self.correction == Correction::Sqrtlog {
            y += 0.5 * n.ln().ln();
        }
        y.exp()
    }
}

fn response(n: usize, regret: f64, correction: Correction) -> f64 {
    let ln_n = (n as f64).ln();
    match correction {
        Correction::None => regret.ln(),
        Correction::Sqrtlog => regret.ln() - 0.5 * ln_n.ln(),
    }
}

/// Ordinary least squares of `ln regret` on `ln n`.
///
/// Points with regret ≤ 0 are dropped and listed in `dropped`; the fit fails
/// with `NonPositiveRegret` if that leaves fewer than three points.
pub fn fit_slope(rows: &[(usize, f64)], correction: Correction) -> Result<SlopeFit> {
    if rows.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: rows.len(),
        });
    }
    let mut dropped = Vec::new();
    let mut points = Vec::with_capacity(rows.len());
    for &(n, regret) in rows {
        // ln ln n needs n > e for the corrected response to be finite
        let usable = regret > 0.0 && regret.is_finite() && (correction == Correction::None || n >= 3);
        if usable {
            points.push(((n as f64).ln(), response(n, regret, correction)));
        } else {
            dropped.push(n);
        }
    }
    if points.len() < 3 {
        return Err(Error::NonPositiveRegret {
            n: dropped[0],
            remaining: points.len(),
        });
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all horizons are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let slope_se = (rss / (m - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        points,
        slope,
        intercept,
        slope_se,
        correction,
        dropped,
    })
}
