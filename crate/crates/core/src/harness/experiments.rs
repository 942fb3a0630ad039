//! Drivers for the certify, concentration and lowerbound commands.

use serde::{Deserialize, Serialize};

use super::config::{CovarianceSpec, ExperimentConfig, PolicySpec};
use super::sweep::horizon_seed;
use crate::bounds::{certificate, concentration_sweep, regret_threshold_bound, BoundCertificate, ConcentrationTrial};
use crate::environment::gap_profile;
use crate::error::{Error, Result};
use crate::lowerbound::{build_pair, verdict, LowerBoundVerdict};
use crate::numkit::{derive_seed, PsdMatrix};
use crate::policies::PolicyKind;
use crate::regret::{aggregate_report, Estimate};
use crate::runner::run_replications;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyRow {
    pub n: usize,
    pub certificates: Vec<BoundCertificate>,
    pub regret: Estimate,
    pub regret_bound: f64,
    /// Count-based regret ≤ bound + 3 SE.
    pub regret_pass: bool,
}

impl CertifyRow {
    pub fn pass(&self) -> bool {
        self.regret_pass && self.certificates.iter().all(|c| c.pass)
    }
}

/// Runs LCB at every configured horizon and checks the pull-count and
/// regret bounds.
pub fn run_certify(config: &ExperimentConfig) -> Result<Vec<CertifyRow>> {
    let env = config.environment()?;
    let gaps = gap_profile(&env);
    let fisher = (0..env.k()).map(|i| env.fisher_info(i)).collect::<Result<Vec<_>>>()?;
    config
        .horizons
        .iter()
        .map(|&n| {
            let reps = run_replications(
                &env,
                PolicyKind::Lcb,
                n,
                config.replications,
                horizon_seed(config.seed, n),
                config.normalization,
            )?;
            let report = aggregate_report(&gaps, &fisher, &reps, n)?;
            let certificates = certificate(&env, &gaps, n, &report.mean_counts, &report.count_se)?;
            let regret_bound = regret_threshold_bound(&env, &gaps, n);
            let regret = report.count_based_regret;
            Ok(CertifyRow {
                n,
                certificates,
                regret,
                regret_bound,
                regret_pass: regret.mean <= regret_bound + 3.0 * regret.se,
            })
        })
        .collect()
}

pub fn covariance_label(c: &CovarianceSpec) -> String {
    let join = |xs: &[f64]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    match c {
        CovarianceSpec::Diagonal(d) => format!("diag({})", join(d)),
        CovarianceSpec::Full(rows) => {
            format!("matrix({})", rows.iter().map(|r| join(r)).collect::<Vec<_>>().join("; "))
        }
    }
}

/// Concentration grid for every `[sigma]`. Matrix `s` uses the root seed
/// `derive_seed(seed, s)`.
pub fn run_concentration(config: &ExperimentConfig) -> Result<Vec<(String, ConcentrationTrial)>> {
    let params = config
        .concentration
        .as_ref()
        .ok_or_else(|| Error::Validation("concentration block is required".into()))?;
    let mut out = Vec::new();
    for (s, spec) in params.sigmas.iter().enumerate() {
        let sigma = PsdMatrix::new(spec.to_matrix()?)?;
        let mut eps = params.epsilon.clone();
        if let Some(mult) = params.ratio_multiplier {
            eps.push(mult * sigma.frobenius_norm() / sigma.spectral_norm());
        }
        let label = covariance_label(spec);
        for cell in concentration_sweep(&sigma, &params.m, &eps, params.trials, derive_seed(config.seed, s as u64))? {
            out.push((label.clone(), cell));
        }
    }
    Ok(out)
}

fn lowerbound_policies(config: &ExperimentConfig) -> Vec<PolicySpec> {
    if config.policies.is_empty() {
        vec![PolicySpec::Lcb, PolicySpec::Uniform, PolicySpec::Greedy]
    } else {
        config.policies.clone()
    }
}

pub fn lowerbound_seed(root: u64, k: usize, n: usize) -> u64 {
    derive_seed(derive_seed(root, k as u64), n as u64)
}

/// Verdicts for every `(k, n, policy)` cell. Policies default to LCB,
/// Uniform and Greedy.
pub fn run_lowerbound(config: &ExperimentConfig) -> Result<Vec<LowerBoundVerdict>> {
    let params = config
        .lowerbound
        .as_ref()
        .ok_or_else(|| Error::Validation("lowerbound block is required".into()))?;
    let mut out = Vec::new();
    for &k in &params.arms {
        for &n in &config.horizons {
            let pair = build_pair(n, k, params.sigma1, params.gamma)?;
            let nu = pair.nu()?;
            for spec in lowerbound_policies(config) {
                let policy = spec.resolve(&nu);
                out.push(verdict(policy, &pair, config.replications, lowerbound_seed(config.seed, k, n), config.normalization)?);
            }
        }
    }
    Ok(out)
}

pub fn verdict_passes(v: &LowerBoundVerdict) -> bool {
    v.pass && v.bh.pass && v.floor_pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    #[test]
    fn certify_small_suite() {
        let c = parse_config(
            "seed = 1\nreplications = 50\nhorizons = 256 1024\n[environment]\ngamma = 3\ntheta = 0\n\
             [arm]\nvariance = 1\n[arm]\nvariance = 2\n[arm]\nvariance = 3\n",
        )
        .unwrap();
        let rows = run_certify(&c).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert_eq!(r.certificates.len(), 2);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn concentration_adds_ratio_cell() {
        let c = parse_config(
            "replications = 2\nhorizons = 1\n[concentration]\ntrials = 200\nm = 10\nepsilon = 0.5\n\
             ratio_multiplier = 1.5\n[sigma]\ndiag = 1 4\n",
        )
        .unwrap();
        let cells = run_concentration(&c).unwrap();
        assert_eq!(cells.len(), 2);
        let ratio = 17f64.sqrt() / 4.0;
        assert!((cells[1].1.epsilon - 1.5 * ratio).abs() < 1e-12);
        assert_eq!(cells[0].0, "diag(1 4)");
    }

    #[test]
    fn lowerbound_defaults_to_three_policies() {
        let c = parse_config("replications = 20\nhorizons = 1000\n[lowerbound]\nsigma1 = 1\ngamma = 2\narms = 2\n").unwrap();
        let v = run_lowerbound(&c).unwrap();
        let names: Vec<_> = v.iter().map(|v| v.policy.as_str()).collect();
        assert_eq!(names, vec!["lcb", "uniform", "greedy"]);
    }
}
