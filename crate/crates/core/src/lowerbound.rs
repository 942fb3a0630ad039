//! Two-environment lower-bound construction for scalar arms.
//!
//! In `ν` arm 1 has the largest Fisher information `1/σ_1` and every other
//! arm has `1/σ_c = 1/σ_1 − Λ`. Once a policy's least-pulled suboptimal arm
//! `h` is known, `ν′` upgrades `h` to `1/σ** = 1/σ_1 + Λ`. No policy can
//! keep the additive Fisher regret small in both environments, and choosing
//! `Λ ∝ 1/√n` makes their sum grow like `√n`.
//!
//! Variances are used throughout, so `I^θ = 1/σ` for an arm of variance `σ`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::numkit::{derive_seed, Normalization};
use crate::policies::{run_episode_with, EpisodeOutcome, PolicyKind};
use crate::regret::Estimate;
use crate::runner::{par_replicate, run_outcomes};

/// `KL(N(θ, var1) ‖ N(θ, var2))`.
pub fn kl_same_mean_gaussian(var1: f64, var2: f64) -> Result<f64> {
    for v in [var1, var2] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveVariance(v));
        }
    }
    let r = var1 / var2;
    // ln(var2/var1) + r − 1, written to stay accurate when r ≈ 1
    Ok(0.5 * ((r - 1.0) - r.ln()))
}

/// `log(p(x)/q(x))` for same-mean scalar Gaussians with variances `var_p`, `var_q`.
pub fn log_likelihood_ratio(x: f64, theta: f64, var_p: f64, var_q: f64) -> f64 {
    let dev = x - theta;
    0.5 * (var_q / var_p).ln() + 0.5 * dev * dev * (1.0 / var_q - 1.0 / var_p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPair {
    pub n: usize,
    pub k: usize,
    pub gamma: f64,
    /// Variance of arm 1 in both environments.
    pub sigma1: f64,
    /// Variance of arms `2..k` in `ν`.
    pub sigma_c: f64,
    /// Variance of arm `h` in `ν′`.
    pub sigma_star: f64,
    /// Zero-based index of the arm that differs in `ν′`.
    pub h: usize,
    pub lambda: f64,
    /// Reverse-Lipschitz constant `1/Γ²`.
    pub l_const: f64,
    /// Fisher information in the variance parameter, `1/(2σ_1²)`.
    pub i_sigma1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `I^{σ_1}·(σ** − σ_1)²`.
    pub lambda_tilde_bound: f64,
}

/// Constants of the construction, before any feasibility check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairConstants {
    pub l_const: f64,
    pub i_sigma1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `√((k−1)/(n·C_1))`
    pub lambda: f64,
}

pub fn pair_constants(n: usize, k: usize, sigma1: f64, gamma: f64) -> PairConstants {
    let l_const = 1.0 / (gamma * gamma);
    let i_sigma1 = 1.0 / (2.0 * sigma1 * sigma1);
    let c1 = i_sigma1 / (l_const * l_const);
    let km1 = k.saturating_sub(1) as f64;
    let i1_theta = 1.0 / sigma1;
    PairConstants {
        l_const,
        i_sigma1,
        c1,
        c2: (km1 / c1).sqrt() / (4.0 * E),
        c3: l_const * km1.sqrt() / (4.0 * E * i_sigma1.sqrt() * i1_theta * i1_theta),
        lambda: (km1 / (n as f64 * c1)).sqrt(),
    }
}

pub fn build_pair(n: usize, k: usize, sigma1: f64, gamma: f64) -> Result<LowerBoundPair> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least two arms, got {k}")));
    }
    if n < 1 {
        return Err(Error::HorizonTooSmall(n));
    }
    if !(sigma1 > 0.0) {
        return Err(Error::NonPositiveVariance(sigma1));
    }
    if sigma1 > gamma {
        return Err(Error::GammaViolated {
            arm: 0,
            norm: sigma1,
            gamma,
        });
    }
    let c = pair_constants(n, k, sigma1, gamma);
    let inv_sigma_c = 1.0 / sigma1 - c.lambda;
    if inv_sigma_c <= 0.0 {
        return Err(Error::LambdaTooLarge {
            lambda: c.lambda,
            inv_sigma_c,
        });
    }
    let sigma_c = 1.0 / inv_sigma_c;
    if sigma_c > gamma {
        return Err(Error::GammaViolated {
            arm: 1,
            norm: sigma_c,
            gamma,
        });
    }
    let sigma_star = 1.0 / (1.0 / sigma1 + c.lambda);
    Ok(LowerBoundPair {
        n,
        k,
        gamma,
        sigma1,
        sigma_c,
        sigma_star,
        h: 1,
        lambda: c.lambda,
        l_const: c.l_const,
        i_sigma1: c.i_sigma1,
        c1: c.c1,
        c2: c.c2,
        c3: c.c3,
        lambda_tilde_bound: c.i_sigma1 * (sigma_star - sigma1).powi(2),
    })
}

impl LowerBoundPair {
    pub fn nu_variances(&self) -> Vec<f64> {
        let mut v = vec![self.sigma_c; self.k];
        v[0] = self.sigma1;
        v
    }

    pub fn nu_prime_variances(&self, h: usize) -> Vec<f64> {
        let mut v = self.nu_variances();
        v[h] = self.sigma_star;
        v
    }

    pub fn nu(&self) -> Result<EnvironmentSpec> {
        EnvironmentSpec::scalar(0.0, &self.nu_variances(), self.gamma)
    }

    pub fn nu_prime(&self, h: usize) -> Result<EnvironmentSpec> {
        if h == 0 || h >= self.k {
            return Err(Error::InvalidArgument(format!("weak arm must be in 1..{}, got {h}", self.k)));
        }
        EnvironmentSpec::scalar(0.0, &self.nu_prime_variances(h), self.gamma)
    }

    /// `C_3·n^{-3/2}`.
    pub fn r_i_floor(&self) -> f64 {
        self.c3 * (self.n as f64).powf(-1.5)
    }
}

/// Scalar variances of an environment, or an error for `d > 1`.
fn scalar_variances(env: &EnvironmentSpec) -> Result<Vec<f64>> {
    if env.d() != 1 {
        return Err(Error::InvalidArgument("lower-bound tools need scalar arms".into()));
    }
    Ok(env.covariances().iter().map(|c| c.matrix()[(0, 0)]).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakArm {
    pub arm: usize,
    pub mean_counts: Vec<f64>,
    pub count_se: Vec<f64>,
    /// `mean[T_h] ≤ n/(k−1) + 3 SE`.
    pub guarantee: bool,
}

fn count_estimates(outcomes: &[EpisodeOutcome], k: usize) -> Vec<Estimate> {
    (0..k)
        .map(|i| Estimate::from_samples(outcomes.iter().map(|o| o.counts[i] as f64)))
        .collect()
}

fn weak_arm_from(outcomes: &[EpisodeOutcome], k: usize, n: usize) -> WeakArm {
    let est = count_estimates(outcomes, k);
    let mut arm = 1;
    for j in 2..k {
        if est[j].mean < est[arm].mean {
            arm = j;
        }
    }
    WeakArm {
        arm,
        guarantee: est[arm].mean <= n as f64 / (k - 1) as f64 + 3.0 * est[arm].se,
        mean_counts: est.iter().map(|e| e.mean).collect(),
        count_se: est.iter().map(|e| e.se).collect(),
    }
}

/// The suboptimal arm the policy visits least on `ν`.
pub fn find_weak_arm(
    policy: PolicyKind,
    nu: &EnvironmentSpec,
    n: usize,
    reps: usize,
    root_seed: u64,
    normalization: Normalization,
) -> Result<WeakArm> {
    if nu.k() < 2 {
        return Err(Error::InvalidArgument("need at least two arms".into()));
    }
    let outcomes = run_outcomes(nu, policy, n, reps, root_seed, normalization)?;
    Ok(weak_arm_from(&outcomes, nu.k(), n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BhCheck {
    pub p: f64,
    pub q: f64,
    pub kl: f64,
    /// `½·exp(−kl)`
    pub threshold: f64,
    pub se: f64,
    pub pass: bool,
}

/// `p + q ≥ ½·exp(−kl) − 3·se`.
pub fn bh_inequality_check(p: f64, q: f64, kl: f64, se: f64) -> BhCheck {
    let threshold = 0.5 * (-kl).exp();
    BhCheck {
        p,
        q,
        kl,
        threshold,
        se,
        pass: p + q >= threshold - 3.0 * se,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundVerdict {
    pub policy: String,
    pub n: usize,
    pub k: usize,
    pub h: usize,
    pub weak_arm_guarantee: bool,
    /// `Σ_i mean[T_i]·Λ_i` on `ν`.
    pub r_nu: Estimate,
    /// Same on `ν′`.
    pub r_nu_prime: Estimate,
    pub sum: f64,
    pub se: f64,
    /// `C_2·√n`
    pub threshold: f64,
    pub pass: bool,
    pub c2: f64,
    pub c3: f64,
    pub bh: BhCheck,
    /// `C_3·n^{-3/2}`
    pub floor: f64,
    /// `1/(Σ mean[T_i]/σ_i) − σ_best/n` on each environment.
    pub realized_r_i_nu: f64,
    pub realized_r_i_nu_prime: f64,
    pub floor_pass: bool,
}

/// Per-replication `Σ_i T_i·(I_best − I_i)` for scalar variances.
fn additive_fisher_regret(outcomes: &[EpisodeOutcome], variances: &[f64]) -> Estimate {
    let best = variances.iter().map(|v| 1.0 / v).fold(f64::NEG_INFINITY, f64::max);
    Estimate::from_samples(outcomes.iter().map(|o| {
        o.counts
            .iter()
            .zip(variances)
            .map(|(&c, v)| c as f64 * (best - 1.0 / v))
            .sum()
    }))
}

/// Information shortfall `1/(Σ mean[T_i]/σ_i) − σ_best/n` from mean counts.
fn realized_r_i(mean_counts: &[f64], variances: &[f64], n: usize) -> f64 {
    let info: f64 = mean_counts.iter().zip(variances).map(|(c, v)| c / v).sum();
    let best = variances.iter().cloned().fold(f64::INFINITY, f64::min);
    1.0 / info - best / n as f64
}

/// Runs the policy on `ν` and the re-targeted `ν′` and checks the sum of
/// additive Fisher regrets against `C_2·√n`.
pub fn verdict(
    policy: PolicyKind,
    pair: &LowerBoundPair,
    reps: usize,
    root_seed: u64,
    normalization: Normalization,
) -> Result<LowerBoundVerdict> {
    let n = pair.n;
    let k = pair.k;
    let nu = pair.nu()?;
    let nu_out = run_outcomes(&nu, policy, n, reps, derive_seed(root_seed, 1), normalization)?;
    let weak = weak_arm_from(&nu_out, k, n);
    let h = weak.arm;
    let nu_prime = pair.nu_prime(h)?;
    let prime_out = run_outcomes(&nu_prime, policy, n, reps, derive_seed(root_seed, 2), normalization)?;

    let nu_vars = pair.nu_variances();
    let prime_vars = pair.nu_prime_variances(h);
    let r_nu = additive_fisher_regret(&nu_out, &nu_vars);
    let r_nu_prime = additive_fisher_regret(&prime_out, &prime_vars);
    let sum = r_nu.mean + r_nu_prime.mean;
    let se = r_nu.pooled_se(&r_nu_prime);
    let threshold = pair.c2 * (n as f64).sqrt();

    let half = n as f64 / 2.0;
    let p = nu_out.iter().filter(|o| o.counts[0] as f64 <= half).count() as f64 / reps as f64;
    let q = prime_out.iter().filter(|o| o.counts[0] as f64 > half).count() as f64 / reps as f64;
    let kl = weak.mean_counts[h] * kl_same_mean_gaussian(pair.sigma_c, pair.sigma_star)?;
    let bh_se = (p * (1.0 - p) / reps as f64 + q * (1.0 - q) / reps as f64).sqrt();
    let bh = bh_inequality_check(p, q, kl, bh_se);

    let prime_counts: Vec<f64> = count_estimates(&prime_out, k).iter().map(|e| e.mean).collect();
    let realized_r_i_nu = realized_r_i(&weak.mean_counts, &nu_vars, n);
    let realized_r_i_nu_prime = realized_r_i(&prime_counts, &prime_vars, n);
    let floor = pair.r_i_floor();

    Ok(LowerBoundVerdict {
        policy: policy.name(),
        n,
        k,
        h,
        weak_arm_guarantee: weak.guarantee,
        r_nu,
        r_nu_prime,
        sum,
        se,
        threshold,
        pass: sum >= threshold - 3.0 * se,
        c2: pair.c2,
        c3: pair.c3,
        bh,
        floor,
        realized_r_i_nu,
        realized_r_i_nu_prime,
        floor_pass: realized_r_i_nu.max(realized_r_i_nu_prime) >= floor,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCheck {
    /// `Σ_i mean_ν[T_i]·KL(P_i, P′_i)`
    pub analytic: f64,
    /// Mean log-likelihood ratio of the `ν`-trajectories.
    pub monte_carlo: Estimate,
    pub relative_error: f64,
}

/// Compares the divergence decomposition against a direct Monte-Carlo
/// estimate of `KL(P_{π,ν}, P_{π,ν′})`. Only arms whose distributions differ
/// contribute to either side.
pub fn divergence_decomposition_check(
    policy: PolicyKind,
    nu: &EnvironmentSpec,
    nu_prime: &EnvironmentSpec,
    n: usize,
    reps: usize,
    root_seed: u64,
    normalization: Normalization,
) -> Result<DivergenceCheck> {
    let v = scalar_variances(nu)?;
    let vp = scalar_variances(nu_prime)?;
    if v.len() != vp.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: vp.len(),
        });
    }
    let theta = nu.theta()[0];
    let per_arm_kl: Vec<f64> = v
        .iter()
        .zip(&vp)
        .map(|(&a, &b)| if a == b { Ok(0.0) } else { kl_same_mean_gaussian(a, b) })
        .collect::<Result<_>>()?;
    let runs: Vec<(Vec<u64>, f64)> = par_replicate(reps, root_seed, |_, rng| {
        let mut llr = 0.0;
        let out = run_episode_with(nu, policy, n, normalization, rng, |_, arm, x| {
            if v[arm] != vp[arm] {
                llr += log_likelihood_ratio(x[0], theta, v[arm], vp[arm]);
            }
        })?;
        Ok((out.counts, llr))
    })?;
    let analytic: f64 = (0..v.len())
        .map(|i| runs.iter().map(|(c, _)| c[i] as f64).sum::<f64>() / reps as f64 * per_arm_kl[i])
        .sum();
    let monte_carlo = Estimate::from_samples(runs.iter().map(|(_, l)| *l));
    let relative_error = if analytic == 0.0 {
        if monte_carlo.mean == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (monte_carlo.mean - analytic).abs() / analytic
    };
    Ok(DivergenceCheck {
        analytic,
        monte_carlo,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson quadrature of `∫ p·ln(p/q)` over ±14 standard deviations of `p`.
    fn kl_quadrature(var1: f64, var2: f64) -> f64 {
        let sd = var1.sqrt();
        let (lo, hi) = (-14.0 * sd, 14.0 * sd);
        let steps = 20_000;
        let h = (hi - lo) / steps as f64;
        let density = |x: f64, v: f64| (-x * x / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        let f = |x: f64| {
            let p = density(x, var1);
            if p == 0.0 {
                0.0
            } else {
                p * (0.5 * (var2 / var1).ln() - x * x / 2.0 * (1.0 / var1 - 1.0 / var2))
            }
        };
        let mut s = f(lo) + f(hi);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_same_mean_gaussian(1.7, 1.7).unwrap(), 0.0);
        let v = kl_same_mean_gaussian(1.0, 2.0).unwrap();
        assert!((v - 0.5 * (2f64.ln() - 0.5)).abs() < 1e-15);
        assert!((v - 0.09657).abs() < 1e-5);
        assert!((v - kl_quadrature(1.0, 2.0)).abs() < 1e-9);
        assert!(matches!(kl_same_mean_gaussian(0.0, 1.0), Err(Error::NonPositiveVariance(_))));
        assert!(matches!(kl_same_mean_gaussian(1.0, -2.0), Err(Error::NonPositiveVariance(_))));
    }

    #[test]
    fn kl_below_local_quadratic_bound() {
        // KL ≤ (var2 − var1)²/(2·var1²) for var2 ∈ [var1, 2·var1]
        for &var1 in &[0.1, 0.5, 1.0, 3.0] {
            for i in 0..=100 {
                let var2 = var1 * (1.0 + i as f64 / 100.0);
                let kl = kl_same_mean_gaussian(var1, var2).unwrap();
                assert!(kl <= (var2 - var1).powi(2) / (2.0 * var1 * var1) + 1e-15);
            }
        }
    }

    #[test]
    fn constants_for_unit_gamma() {
        let c = pair_constants(200, 2, 1.0, 1.0);
        assert_eq!((c.l_const, c.i_sigma1, c.c1), (1.0, 0.5, 0.5));
        assert!((c.lambda - 0.1).abs() < 1e-15);
        assert!((c.c2 - 2f64.sqrt() / (4.0 * E)).abs() < 1e-15);
        assert!((c.c2 - 0.1301).abs() < 1e-4);
        assert!((c.c3 - 2f64.sqrt() / (4.0 * E)).abs() < 1e-15);
    }

    #[test]
    fn lambda_too_large_at_tiny_horizon() {
        // Λ = √(2/n) = 1 at n = 2 leaves 1/σ_c = 0
        let err = build_pair(2, 2, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::LambdaTooLarge { .. }));
    }

    #[test]
    fn pair_with_gamma_two() {
        // L = 1/4, C_1 = ½·16 = 8, Λ = √(1/(200·8)) = 0.025
        let p = build_pair(200, 2, 1.0, 2.0).unwrap();
        assert!((p.c1 - 8.0).abs() < 1e-15);
        assert!((p.lambda - 0.025).abs() < 1e-15);
        assert!((p.sigma_c - 1.0 / 0.975).abs() < 1e-12);
        assert!((p.sigma_star - 1.0 / 1.025).abs() < 1e-12);
        assert!(p.sigma_c <= 2.0 && p.sigma_star <= 2.0);
        assert!((p.lambda_tilde_bound - 0.5 * (1.0 / 1.025 - 1.0f64).powi(2)).abs() < 1e-15);
        let nu = p.nu_variances();
        assert_eq!(nu, vec![1.0, p.sigma_c]);
        assert_eq!(p.nu_prime_variances(1), vec![1.0, p.sigma_star]);
        assert!(p.nu_prime(0).is_err());
    }

    #[test]
    fn pair_gamma_violation() {
        // Γ = 1.05: C_1 = Γ⁴/2, Λ ≈ 0.0907, σ_c ≈ 1.0998 > Γ
        assert!(matches!(build_pair(200, 2, 1.0, 1.05), Err(Error::GammaViolated { arm: 1, .. })));
        assert!(matches!(build_pair(200, 2, 3.0, 2.0), Err(Error::GammaViolated { arm: 0, .. })));
        assert!(build_pair(200, 1, 1.0, 2.0).is_err());
    }

    #[test]
    fn bh_edge_cases() {
        assert!(bh_inequality_check(0.3, 0.7, 0.0, 0.0).pass);
        let far = bh_inequality_check(0.0, 0.0, 1e6, 0.0);
        assert!(far.threshold == 0.0 && far.pass);
        assert!(!bh_inequality_check(0.1, 0.1, 0.0, 0.01).pass);
    }

    #[test]
    fn weak_arm_for_two_arms_is_arm_two() {
        let p = build_pair(1000, 2, 1.0, 2.0).unwrap();
        let w = find_weak_arm(PolicyKind::Lcb, &p.nu().unwrap(), 1000, 20, 1, Normalization::Biased).unwrap();
        assert_eq!(w.arm, 1);
    }

    #[test]
    fn weak_arm_under_round_robin() {
        let p = build_pair(1000, 4, 1.0, 2.0).unwrap();
        let w = find_weak_arm(PolicyKind::Uniform, &p.nu().unwrap(), 1000, 10, 1, Normalization::Biased).unwrap();
        assert_eq!(w.arm, 1);
        assert_eq!(w.mean_counts, vec![250.0; 4]);
        assert!(w.guarantee);
    }

    #[test]
    fn weak_arm_is_reproducible() {
        let p = build_pair(500, 4, 1.0, 2.0).unwrap();
        let nu = p.nu().unwrap();
        let a = find_weak_arm(PolicyKind::Lcb, &nu, 500, 50, 9, Normalization::Biased).unwrap();
        let b = find_weak_arm(PolicyKind::Lcb, &nu, 500, 50, 9, Normalization::Biased).unwrap();
        assert_eq!(a, b);
        assert!(a.guarantee);
    }

    #[test]
    fn oracle_for_nu_pays_on_nu_prime() {
        let pair = build_pair(1000, 2, 1.0, 2.0).unwrap();
        let v = verdict(PolicyKind::Oracle { best_arm: 0 }, &pair, 20, 4, Normalization::Biased).unwrap();
        assert_eq!(v.r_nu.mean, 0.0);
        let n_lambda = 1000.0 * pair.lambda;
        assert!((v.r_nu_prime.mean - n_lambda).abs() < 1e-9);
        // n·Λ = 4e·C_2·√n
        assert!((n_lambda - 4.0 * E * pair.c2 * 1000f64.sqrt()).abs() < 1e-9);
        assert!(v.pass);
    }

    #[test]
    fn uniform_verdict_matches_closed_form() {
        let pair = build_pair(1000, 5, 1.0, 2.0).unwrap();
        let v = verdict(PolicyKind::Uniform, &pair, 10, 4, Normalization::Biased).unwrap();
        // ν: 800 suboptimal pulls at Λ each; ν′: 200 pulls of arm 1 at Λ, 600 of the rest at 2Λ
        let l = pair.lambda;
        assert!((v.r_nu.mean - 800.0 * l).abs() < 1e-9);
        assert!((v.r_nu_prime.mean - (200.0 * l + 600.0 * 2.0 * l)).abs() < 1e-9);
        assert!(v.sum >= v.threshold);
        assert!(v.pass);
    }

    #[test]
    fn divergence_trivial_cases() {
        let pair = build_pair(400, 3, 1.0, 2.0).unwrap();
        let nu = pair.nu().unwrap();
        let same = divergence_decomposition_check(PolicyKind::Uniform, &nu, &nu, 400, 10, 1, Normalization::Biased).unwrap();
        assert_eq!((same.analytic, same.monte_carlo.mean, same.relative_error), (0.0, 0.0, 0.0));
        let prime = pair.nu_prime(2).unwrap();
        let never = divergence_decomposition_check(
            PolicyKind::Oracle { best_arm: 0 },
            &nu,
            &prime,
            400,
            10,
            1,
            Normalization::Biased,
        )
        .unwrap();
        assert_eq!((never.analytic, never.monte_carlo.mean), (0.0, 0.0));
    }

    #[test]
    fn llr_mean_is_kl() {
        use crate::numkit::RngStream;
        let (v1, v2) = (1.3f64, 0.8);
        let mut rng = RngStream::new(2, 0);
        let n = 400_000;
        let mean = (0..n)
            .map(|_| log_likelihood_ratio(v1.sqrt() * rng.standard_normal(), 0.0, v1, v2))
            .sum::<f64>()
            / n as f64;
        let kl = kl_same_mean_gaussian(v1, v2).unwrap();
        assert!((mean - kl).abs() < 0.01 * kl.max(0.01) + 4.0 / (n as f64).sqrt());
    }
}
