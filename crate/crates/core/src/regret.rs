//! Regret of the final sample-mean estimator and its two decompositions.
//!
//! Regret is the excess MSE of `θ̂` over the Cramér–Rao value of always
//! sampling the best arm, `Tr((n·I_{a*})⁻¹) = Tr(Σ*)/n`. For Gaussian arms it
//! collapses to `(1/n²)·Σ_i Δ_i·E[T_i(n)]`, which is observed directly
//! through pull counts and is far less noisy than the raw MSE.

use serde::{Deserialize, Serialize};

use crate::environment::GapProfile;
use crate::error::{Error, Result};
use crate::numkit::{spd_inverse, Matrix};
use crate::policies::EpisodeOutcome;

/// Monte-Carlo mean with its normal-approximation standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_samples(xs: impl IntoIterator<Item = f64>) -> Self {
        let mut count = 0u64;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for x in xs {
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
        let se = if count >= 2 {
            (m2 / (count - 1) as f64 / count as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }

    /// Standard error of a difference or sum of two independent estimates.
    pub fn pooled_se(&self, other: &Estimate) -> f64 {
        self.se.hypot(other.se)
    }
}

/// What one replication contributes to a regret estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationSummary {
    pub counts: Vec<u64>,
    /// `‖θ̂ − θ‖²`.
    pub sq_error: f64,
}

impl ReplicationSummary {
    pub fn from_outcome(outcome: &EpisodeOutcome, theta: &[f64]) -> Self {
        Self {
            counts: outcome.counts.clone(),
            sq_error: squared_error(&outcome.theta_hat, theta),
        }
    }
}

pub fn squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `(1/n²)·Σ_i Δ_i·counts[i]`.
pub fn count_based_regret(gaps: &GapProfile, mean_counts: &[f64], n: usize) -> Result<f64> {
    if mean_counts.len() != gaps.k() {
        return Err(Error::DimensionMismatch {
            expected: gaps.k(),
            got: mean_counts.len(),
        });
    }
    let sum: f64 = mean_counts.iter().sum();
    if (sum - n as f64).abs() > 1e-9 * (n as f64).max(1.0) {
        return Err(Error::CountMismatch { sum, n });
    }
    let nf = n as f64;
    Ok(gaps.gaps.iter().zip(mean_counts).map(|(g, c)| g * c).sum::<f64>() / (nf * nf))
}

/// Mean of `‖θ̂ − θ‖²` minus `Tr(Σ*)/n`.
pub fn mse_based_regret(theta_hats: &[Vec<f64>], theta: &[f64], optimal_trace: f64, n: usize) -> Result<Estimate> {
    if theta_hats.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: theta_hats.len(),
        });
    }
    let mse = Estimate::from_samples(theta_hats.iter().map(|h| squared_error(h, theta)));
    Ok(Estimate {
        mean: mse.mean - optimal_trace / n as f64,
        se: mse.se,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub n: usize,
    pub replications: usize,
    pub mean_counts: Vec<f64>,
    pub count_se: Vec<f64>,
    pub count_based_regret: Estimate,
    /// Raw `E‖θ̂ − θ‖²`.
    pub mse: Estimate,
    pub mse_based_regret: Estimate,
    /// `Tr([Σ_i E[T_i]·I_i]⁻¹) − Tr((n·I_{a*})⁻¹)`: information shortfall of the pulls.
    pub r_i: f64,
    /// `mse − Tr([Σ_i E[T_i]·I_i]⁻¹)`: estimator inefficiency given the pulls.
    pub r_thetatilde: Estimate,
    /// `(1/n²)·Σ_i E[T_i]·Tr(Σ_i) − Tr(Σ*)/n`.
    pub dec1_second_term: f64,
}

/// Fills every report field from mean counts and the raw MSE. Count-side
/// standard errors are zero here; [`aggregate_report`] computes them from
/// replication data.
pub fn decomposition_report(
    gaps: &GapProfile,
    fisher_infos: &[Matrix],
    mean_counts: &[f64],
    mse: Estimate,
    n: usize,
) -> Result<RegretReport> {
    let count_regret = Estimate {
        mean: count_based_regret(gaps, mean_counts, n)?,
        se: 0.0,
    };
    build_report(gaps, fisher_infos, mean_counts, &vec![0.0; mean_counts.len()], count_regret, mse, n, 0)
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    gaps: &GapProfile,
    fisher_infos: &[Matrix],
    mean_counts: &[f64],
    count_se: &[f64],
    count_regret: Estimate,
    mse: Estimate,
    n: usize,
    replications: usize,
) -> Result<RegretReport> {
    if fisher_infos.len() != gaps.k() {
        return Err(Error::DimensionMismatch {
            expected: gaps.k(),
            got: fisher_infos.len(),
        });
    }
    let nf = n as f64;
    let d = fisher_infos[0].dim();
    let mut aggregate = Matrix::zeros(d);
    for (info, &c) in fisher_infos.iter().zip(mean_counts) {
        if c > 0.0 {
            aggregate.add_scaled(c, info);
        }
    }
    let realized = spd_inverse(&aggregate)?.trace();
    // Tr((n·I_{a*})⁻¹) = Tr(Σ*)/n for Gaussian arms
    let optimal = gaps.optimal_trace / nf;
    let dec1 = gaps.traces.iter().zip(mean_counts).map(|(t, c)| t * c).sum::<f64>() / (nf * nf) - optimal;
    Ok(RegretReport {
        n,
        replications,
        mean_counts: mean_counts.to_vec(),
        count_se: count_se.to_vec(),
        count_based_regret: count_regret,
        mse,
        mse_based_regret: Estimate {
            mean: mse.mean - optimal,
            se: mse.se,
        },
        r_i: realized - optimal,
        r_thetatilde: Estimate {
            mean: mse.mean - realized,
            se: mse.se,
        },
        dec1_second_term: dec1,
    })
}

/// Aggregates replications into a full report.
pub fn aggregate_report(
    gaps: &GapProfile,
    fisher_infos: &[Matrix],
    reps: &[ReplicationSummary],
    n: usize,
) -> Result<RegretReport> {
    if reps.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = gaps.k();
    let per_arm: Vec<Estimate> = (0..k)
        .map(|i| Estimate::from_samples(reps.iter().map(|r| r.counts[i] as f64)))
        .collect();
    let mean_counts: Vec<f64> = per_arm.iter().map(|e| e.mean).collect();
    let count_se: Vec<f64> = per_arm.iter().map(|e| e.se).collect();
    let nf = n as f64;
    let count_regret = Estimate::from_samples(reps.iter().map(|r| {
        gaps.gaps
            .iter()
            .zip(&r.counts)
            .map(|(g, &c)| g * c as f64)
            .sum::<f64>()
            / (nf * nf)
    }));
    // validate counts
    count_based_regret(gaps, &mean_counts, n)?;
    let mse = Estimate::from_samples(reps.iter().map(|r| r.sq_error));
    build_report(gaps, fisher_infos, &mean_counts, &count_se, count_regret, mse, n, reps.len())
}
