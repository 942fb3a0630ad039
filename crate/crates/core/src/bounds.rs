//! Empirical checks of the machinery behind the LCB upper bound: the trace
//! concentration inequality and the per-arm pull-count bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::{EnvironmentSpec, GapProfile};
use crate::error::{Error, Result};
use crate::numkit::{derive_seed, mvn_sample_into, Matrix, PsdMatrix, RngStream};
use crate::policies::schedule_exponent;

/// One `(m, ε)` cell of a concentration sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTrial {
    pub m: usize,
    pub epsilon: f64,
    pub trials: usize,
    /// Fraction of trials with `|Tr(Σ) − Tr(Σ̂)| > ε‖Σ‖_F`.
    pub empirical_tail: f64,
    pub bound: f64,
    /// Binomial standard error of the tail frequency under the bound.
    pub se: f64,
    pub pass: bool,
}

/// `2·exp(−((m−1)/8)·min(ε², ε·‖Σ‖_F/‖Σ‖_2))`.
pub fn concentration_bound(m: usize, epsilon: f64, frobenius: f64, spectral: f64) -> f64 {
    let ratio = frobenius / spectral;
    let rate = (epsilon * epsilon).min(epsilon * ratio);
    2.0 * (-((m as f64 - 1.0) / 8.0) * rate).exp()
}

/// `|Tr(Σ) − Tr(Σ̂)|` for one batch of `m` draws, with `Σ̂` normalized by `m − 1`.
fn trace_deviation(chol: &Matrix, true_trace: f64, m: usize, rng: &mut RngStream) -> f64 {
    let d = chol.dim();
    let zero = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut x = vec![0.0; d];
    let mut mean = vec![0.0; d];
    let mut m2 = vec![0.0; d];
    for t in 1..=m {
        mvn_sample_into(&zero, chol, rng, &mut z, &mut x);
        for j in 0..d {
            let delta = x[j] - mean[j];
            mean[j] += delta / t as f64;
            m2[j] += delta * (x[j] - mean[j]);
        }
    }
    let est: f64 = m2.iter().sum::<f64>() / (m as f64 - 1.0);
    (true_trace - est).abs()
}

/// Tail frequencies of the trace estimator against the concentration bound.
///
/// Trials for a given `m` are shared across the `ε` grid. Trial `j` of the
/// `i`-th sample size draws from stream `j` of `derive_seed(root_seed, i)`.
pub fn concentration_sweep(
    sigma: &PsdMatrix,
    m_grid: &[usize],
    eps_grid: &[f64],
    trials: usize,
    root_seed: u64,
) -> Result<Vec<ConcentrationTrial>> {
    if let Some(&m) = m_grid.iter().find(|&&m| m < 2) {
        return Err(Error::InvalidArgument(format!("sample size must be at least 2, got {m}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if eps_grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let chol = sigma.cholesky();
    let frob = sigma.frobenius_norm();
    let spec = sigma.spectral_norm();
    let tr = sigma.trace();
    let mut out = Vec::with_capacity(m_grid.len() * eps_grid.len());
    for (mi, &m) in m_grid.iter().enumerate() {
        let seed = derive_seed(root_seed, mi as u64);
        let deviations: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|j| {
                let mut rng = RngStream::new(seed, j as u64);
                trace_deviation(&chol, tr, m, &mut rng) / frob
            })
            .collect();
        for &epsilon in eps_grid {
            let hits = deviations.iter().filter(|&&z| z > epsilon).count();
            let empirical_tail = hits as f64 / trials as f64;
            let bound = concentration_bound(m, epsilon, frob, spec);
            let p = bound.min(1.0);
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            out.push(ConcentrationTrial {
                m,
                epsilon,
                trials,
                empirical_tail,
                bound,
                se,
                pass: empirical_tail <= bound + 3.0 * se,
            });
        }
    }
    Ok(out)
}

/// Constants of the pull-count bound for dimension `d` and bound `Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// `max{2, (d−1)²}`
    pub alpha: f64,
    /// `1/(1+√α)`
    pub c: f64,
    /// `8Γ²(1+√α)²`
    pub c_d: f64,
}

impl BoundConstants {
    pub fn new(d: usize, gamma: f64) -> Self {
        let alpha = schedule_exponent(d);
        let root = 1.0 + alpha.sqrt();
        Self {
            alpha,
            c: 1.0 / root,
            c_d: 8.0 * gamma * gamma * root * root,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub arm: usize,
    pub gap: f64,
    pub n: usize,
    pub alpha: f64,
    pub c: f64,
    /// Pull budget of the good event.
    pub u: f64,
    /// Slack left once the confidence width at `u − 1` pulls is paid.
    pub eta: f64,
    pub c_d: f64,
    /// `C_d·log(n)/Δ² + 5`
    pub predicted_bound: f64,
    pub empirical_mean: f64,
    pub empirical_se: f64,
    pub pass: bool,
}

/// Certificate for a single arm; fails with [`Error::ZeroGap`] for a zero-gap arm.
pub fn certify_arm(
    env: &EnvironmentSpec,
    gaps: &GapProfile,
    arm: usize,
    n: usize,
    empirical_mean: f64,
    empirical_se: f64,
) -> Result<BoundCertificate> {
    let gap = gaps.gaps[arm];
    if !(gap > 0.0) {
        return Err(Error::ZeroGap(arm));
    }
    let gamma = env.gamma();
    let consts = BoundConstants::new(env.d(), gamma);
    // log(2/δ) with δ = 2/n^α
    let log_term = consts.alpha * (n as f64).ln();
    let one_minus_c = 1.0 - consts.c;
    let u = (8.0 * gamma * gamma * log_term / (one_minus_c * one_minus_c * gap * gap)).ceil() + 1.0;
    let eta = gap - gamma * (8.0 * log_term / (u - 1.0)).sqrt();
    let predicted_bound = consts.c_d * (n as f64).ln() / (gap * gap) + 5.0;
    Ok(BoundCertificate {
        arm,
        gap,
        n,
        alpha: consts.alpha,
        c: consts.c,
        u,
        eta,
        c_d: consts.c_d,
        predicted_bound,
        empirical_mean,
        empirical_se,
        pass: empirical_mean <= predicted_bound + 3.0 * empirical_se,
    })
}

/// Certificates for every arm with a positive gap.
pub fn certificate(
    env: &EnvironmentSpec,
    gaps: &GapProfile,
    n: usize,
    mean_counts: &[f64],
    count_se: &[f64],
) -> Result<Vec<BoundCertificate>> {
    gaps.suboptimal_arms()
        .map(|arm| certify_arm(env, gaps, arm, n, mean_counts[arm], count_se[arm]))
        .collect()
}

/// Right-hand side of the order-`n^{-3/2}√log n` regret bound:
/// `5·ΣΔ_i/n² + 4Γ(1+√α)·√(2k·log n)/n^{3/2}`.
pub fn regret_threshold_bound(env: &EnvironmentSpec, gaps: &GapProfile, n: usize) -> f64 {
    let nf = n as f64;
    let alpha = schedule_exponent(env.d());
    let gap_sum: f64 = gaps.gaps.iter().sum();
    5.0 * gap_sum / (nf * nf)
        + 4.0 * env.gamma() * (1.0 + alpha.sqrt()) * (2.0 * env.k() as f64 * nf.ln()).sqrt() / nf.powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::gap_profile;

    #[test]
    fn bound_arithmetic() {
        // ε = 1, m = 9: min(1, ratio) = 1 since ratio ≥ 1
        let b = concentration_bound(9, 1.0, 1.0, 1.0);
        assert!((b - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((b - 0.7358).abs() < 1e-4);
        let b2 = concentration_bound(9, 1.0, 5f64.sqrt(), 2.0);
        assert!((b - b2).abs() < 1e-15);
    }

    #[test]
    fn bound_decreases_in_m() {
        let mut prev = f64::INFINITY;
        for m in 2..200 {
            let b = concentration_bound(m, 0.5, 2.0, 1.0);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn large_epsilon_never_hit() {
        let cells = concentration_sweep(&PsdMatrix::identity(2), &[30, 60], &[10.0], 2000, 3).unwrap();
        assert!(cells.iter().all(|c| c.empirical_tail == 0.0 && c.pass));
    }

    #[test]
    fn sweep_rejects_bad_arguments() {
        let s = PsdMatrix::identity(1);
        assert!(concentration_sweep(&s, &[1], &[0.5], 100, 0).is_err());
        assert!(concentration_sweep(&s, &[5], &[0.0], 100, 0).is_err());
        assert!(concentration_sweep(&s, &[5], &[0.5], 0, 0).is_err());
    }

    #[test]
    fn constants_for_small_dimensions() {
        let c1 = BoundConstants::new(1, 1.0);
        assert_eq!(c1.alpha, 2.0);
        assert!((c1.c - 1.0 / (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((c1.c_d - 8.0 * (1.0 + 2f64.sqrt()).powi(2)).abs() < 1e-12);
        assert!((c1.c_d - 46.63).abs() < 5e-3);

        let c3 = BoundConstants::new(3, 2.0);
        assert_eq!(c3.alpha, 4.0);
        assert!((c3.c - 1.0 / 3.0).abs() < 1e-15);
        assert!((c3.c_d - 72.0 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn c_never_exceeds_inverse_dimension() {
        for d in 1..=16 {
            let c = BoundConstants::new(d, 1.0).c;
            assert!(c > 0.0 && c <= 1.0 / d as f64 + 1e-15, "d = {d}");
        }
    }

    #[test]
    fn optimal_arm_cannot_be_certified() {
        let env = EnvironmentSpec::scalar(0.0, &[1.0, 4.0], 4.0).unwrap();
        let g = gap_profile(&env);
        assert_eq!(certify_arm(&env, &g, 0, 100, 50.0, 1.0).unwrap_err(), Error::ZeroGap(0));
        let certs = certificate(&env, &g, 100, &[50.0, 50.0], &[0.0, 0.0]).unwrap();
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].arm, 1);
    }

    #[test]
    fn threshold_bound_scaling() {
        let env = EnvironmentSpec::scalar(0.0, &[1.0], 1.0).unwrap();
        let g = gap_profile(&env);
        assert!(regret_threshold_bound(&env, &g, 100) > 0.0);
        let scaled = |n: usize| regret_threshold_bound(&env, &g, n) * (n as f64).powf(1.5) / (n as f64).ln().sqrt();
        assert!((scaled(1_000) - scaled(1_000_000)).abs() < 1e-9 * scaled(1_000));
    }

    proptest::proptest! {
        // The ceiling in u makes the width at u − 1 pulls at most (1 − c)Δ,
        // which leaves η ≥ cΔ: the direction the exponential step needs.
        #[test]
        fn eta_at_least_c_gap(gap in 1e-3f64..10.0, gamma in 0.1f64..10.0, d in 1usize..10, n in 2usize..1_000_000) {
            let entry = gamma / (2.0 * (d as f64).sqrt());
            let env = EnvironmentSpec::diagonal(vec![0.0; d], &[vec![entry; d], vec![entry; d]], gamma).unwrap();
            let mut g = gap_profile(&env);
            g.gaps[1] = gap;
            let cert = certify_arm(&env, &g, 1, n, 0.0, 0.0).unwrap();
            proptest::prop_assert!(cert.eta >= cert.c * gap * (1.0 - 1e-12));
            proptest::prop_assert!(cert.c <= 1.0 / d as f64 + 1e-15);
        }
    }
}
