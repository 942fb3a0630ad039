//! Horizon-grid sweep over the configured policies.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::environment::{gap_profile, EnvironmentSpec};
use crate::error::Result;
use crate::numkit::{derive_seed, Matrix};
use crate::policies::PolicyKind;
use crate::regret::{aggregate_report, RegretReport};
use crate::runner::run_replications;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub policy: String,
    pub report: RegretReport,
}

impl SweepRow {
    pub fn n(&self) -> usize {
        self.report.n
    }
}

/// Seed shared by every policy at horizon `n`, so policies see common
/// random numbers.
pub fn horizon_seed(root: u64, n: usize) -> u64 {
    derive_seed(root, n as u64)
}

/// One aggregated report for horizon `n` and one policy.
pub fn run_cell(
    env: &EnvironmentSpec,
    fisher: &[Matrix],
    policy: PolicyKind,
    n: usize,
    config: &ExperimentConfig,
) -> Result<SweepRow> {
    let gaps = gap_profile(env);
    let reps = run_replications(
        env,
        policy,
        n,
        config.replications,
        horizon_seed(config.seed, n),
        config.normalization,
    )?;
    Ok(SweepRow {
        policy: policy.name(),
        report: aggregate_report(&gaps, fisher, &reps, n)?,
    })
}

/// Rows ordered by horizon, then by policy in config order. Parallelism is
/// whatever rayon pool the caller installs.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let env = config.environment()?;
    let policies = config.policy_kinds(&env)?;
    for p in &policies {
        p.validate(env.k())?;
    }
    let fisher = (0..env.k()).map(|i| env.fisher_info(i)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(config.horizons.len() * policies.len());
    for &n in &config.horizons {
        for &p in &policies {
            rows.push(run_cell(&env, &fisher, p, n, config)?);
        }
    }
    Ok(rows)
}

/// `(n, count-based regret)` points for one policy.
pub fn regret_points(rows: &[SweepRow], policy: &str) -> Vec<(usize, f64)> {
    rows.iter()
        .filter(|r| r.policy == policy)
        .map(|r| (r.n(), r.report.count_based_regret.mean))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn config(body: &str) -> ExperimentConfig {
        parse_config(&format!("seed = 3\nreplications = 20\nhorizons = 10 40 160\n{body}")).unwrap()
    }

    #[test]
    fn oracle_has_zero_count_regret() {
        let c = config("[environment]\ngamma = 3\ntheta = 1\n[arm]\nvariance = 3\n[arm]\nvariance = 1\n[policy]\nkind = oracle\n");
        for row in run_sweep(&c).unwrap() {
            assert_eq!(row.report.count_based_regret.mean, 0.0);
            assert_eq!(row.report.mean_counts, vec![0.0, row.n() as f64]);
        }
    }

    #[test]
    fn single_arm_takes_every_pull() {
        let c = config("[environment]\ngamma = 2\ntheta = 0\n[arm]\nvariance = 2\n[policy]\nkind = lcb\n[policy]\nkind = greedy\n");
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows.len(), 6);
        for row in rows {
            assert_eq!(row.report.count_based_regret.mean, 0.0);
            assert_eq!(row.report.mean_counts, vec![row.n() as f64]);
        }
    }

    #[test]
    fn uniform_two_arms_is_one_over_n() {
        let c = config("[environment]\ngamma = 3\ntheta = 0\n[arm]\nvariance = 1\n[arm]\nvariance = 3\n[policy]\nkind = uniform\n");
        for row in run_sweep(&c).unwrap() {
            let n = row.n() as f64;
            assert!((row.report.count_based_regret.mean - 1.0 / n).abs() < 1e-15);
            assert_eq!(row.report.count_based_regret.se, 0.0);
        }
    }

    #[test]
    fn sweep_is_reproducible() {
        let c = config("[environment]\ngamma = 3\ntheta = 0\n[arm]\nvariance = 1\n[arm]\nvariance = 3\n[policy]\nkind = lcb\n");
        assert_eq!(run_sweep(&c).unwrap(), run_sweep(&c).unwrap());
    }
}
