//! Gaussian multi-source environments.
//!
//! Every arm emits `N(θ, Σ_i)` with a common mean `θ`; arms differ only in
//! covariance. Arm indices are zero-based throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{mvn_sample_into, Matrix, PsdMatrix, RngStream};

/// Relative slack on the `‖Σ_i‖_F ≤ Γ` check so exact boundary cases survive round-off.
const GAMMA_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EnvironmentSpec {
    theta: Vec<f64>,
    covariances: Vec<PsdMatrix>,
    gamma: f64,
    chol: Vec<Matrix>,
}

impl EnvironmentSpec {
    /// Validates dimensions, PSD-ness and the Frobenius bound, and caches
    /// one Cholesky factor per arm.
    pub fn new(theta: Vec<f64>, covariances: Vec<Matrix>, gamma: f64) -> Result<Self> {
        if covariances.is_empty() {
            return Err(Error::NoArms);
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        let d = theta.len();
        if d == 0 {
            return Err(Error::InvalidArgument("theta must have at least one coordinate".into()));
        }
        let mut psd = Vec::with_capacity(covariances.len());
        for (arm, m) in covariances.into_iter().enumerate() {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.dim(),
                });
            }
            let p = PsdMatrix::new(m).map_err(|_| Error::ArmNotPsd { arm })?;
            let norm = p.frobenius_norm();
            if norm > gamma * (1.0 + GAMMA_SLACK) {
                return Err(Error::GammaViolated { arm, norm, gamma });
            }
            psd.push(p);
        }
        let chol = psd.iter().map(PsdMatrix::cholesky).collect();
        Ok(Self {
            theta,
            covariances: psd,
            gamma,
            chol,
        })
    }

    /// Scalar arms with the given variances.
    pub fn scalar(theta: f64, variances: &[f64], gamma: f64) -> Result<Self> {
        Self::new(
            vec![theta],
            variances.iter().map(|&v| Matrix::diag(&[v])).collect(),
            gamma,
        )
    }

    /// Diagonal covariances; every arm must have `theta.len()` entries.
    pub fn diagonal(theta: Vec<f64>, diagonals: &[Vec<f64>], gamma: f64) -> Result<Self> {
        Self::new(theta, diagonals.iter().map(|d| Matrix::diag(d)).collect(), gamma)
    }

    pub fn k(&self) -> usize {
        self.covariances.len()
    }

    pub fn d(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn covariance(&self, arm: usize) -> &PsdMatrix {
        &self.covariances[arm]
    }

    pub fn covariances(&self) -> &[PsdMatrix] {
        &self.covariances
    }

    pub fn cholesky(&self, arm: usize) -> &Matrix {
        &self.chol[arm]
    }

    /// Allocation-free draw; `scratch` and `out` must have length `d`.
    pub fn pull_into(&self, arm: usize, rng: &mut RngStream, scratch: &mut [f64], out: &mut [f64]) {
        mvn_sample_into(&self.theta, &self.chol[arm], rng, scratch, out);
    }

    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Vec<f64> {
        assert!(arm < self.k(), "arm {arm} out of range");
        let mut z = vec![0.0; self.d()];
        let mut out = vec![0.0; self.d()];
        self.pull_into(arm, rng, &mut z, &mut out);
        out
    }

    /// Fisher information about `θ` carried by one sample of `arm`: `Σ⁻¹`.
    pub fn fisher_info(&self, arm: usize) -> Result<Matrix> {
        self.covariances[arm].inverse()
    }

    /// A copy of this environment with one arm's covariance replaced.
    pub fn with_arm(&self, arm: usize, covariance: Matrix) -> Result<Self> {
        let mut covs: Vec<Matrix> = self.covariances.iter().map(|c| c.matrix().clone()).collect();
        covs[arm] = covariance;
        Self::new(self.theta.clone(), covs, self.gamma)
    }
}

/// Per-arm optimality gaps with respect to the minimum-trace arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub best_arm: usize,
    pub optimal_trace: f64,
    pub traces: Vec<f64>,
    pub gaps: Vec<f64>,
    /// `Tr(Σ_i⁻¹)`; infinite for singular arms.
    pub fisher_traces: Vec<f64>,
}

impl GapProfile {
    pub fn k(&self) -> usize {
        self.gaps.len()
    }

    pub fn suboptimal_arms(&self) -> impl Iterator<Item = usize> + '_ {
        self.gaps
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > 0.0)
            .map(|(i, _)| i)
    }
}

pub fn gap_profile(env: &EnvironmentSpec) -> GapProfile {
    let traces: Vec<f64> = env.covariances.iter().map(PsdMatrix::trace).collect();
    let mut best_arm = 0;
    for (i, &t) in traces.iter().enumerate() {
        if t < traces[best_arm] {
            best_arm = i;
        }
    }
    let optimal_trace = traces[best_arm];
    let gaps = traces.iter().map(|t| (t - optimal_trace).max(0.0)).collect();
    let fisher_traces = (0..env.k())
        .map(|i| env.fisher_info(i).map_or(f64::INFINITY, |m| m.trace()))
        .collect();
    GapProfile {
        best_arm,
        optimal_trace,
        traces,
        gaps,
        fisher_traces,
    }
}

/// Best arm under the Fisher-trace definition, `argmax Tr(Σ_i⁻¹)`.
pub fn fisher_best_arm(gaps: &GapProfile) -> usize {
    let mut best = 0;
    for (i, &f) in gaps.fisher_traces.iter().enumerate() {
        if f > gaps.fisher_traces[best] {
            best = i;
        }
    }
    best
}

/// Reports `(argmin trace, argmax Fisher trace)` when the two best-arm
/// definitions name different arms.
pub fn best_arm_disagreement(env: &EnvironmentSpec) -> Option<(usize, usize)> {
    let gaps = gap_profile(env);
    let by_fisher = fisher_best_arm(&gaps);
    let tied = (gaps.fisher_traces[by_fisher] - gaps.fisher_traces[gaps.best_arm]).abs()
        <= 1e-12 * gaps.fisher_traces[by_fisher].abs();
    (by_fisher != gaps.best_arm && !tied).then_some((gaps.best_arm, by_fisher))
}

/// One round of an episode: the arm chosen at `round` (1-based) and what it returned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullRecord {
    pub round: usize,
    pub arm: usize,
    pub sample: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{Normalization, StreamingCovariance};

    #[test]
    fn builds_valid_scalar_environment() {
        let env = EnvironmentSpec::scalar(0.0, &[1.0, 2.0], 2.0).unwrap();
        assert_eq!((env.k(), env.d()), (2, 1));
    }

    #[test]
    fn rejects_gamma_violation() {
        let err = EnvironmentSpec::scalar(0.0, &[1.0, 3.0], 2.0).unwrap_err();
        assert!(matches!(err, Error::GammaViolated { arm: 1, .. }));
    }

    #[test]
    fn gamma_boundary_is_admitted() {
        EnvironmentSpec::diagonal(vec![0.0, 0.0], &[vec![3.0, 4.0]], 5.0).unwrap();
    }

    #[test]
    fn rejects_non_psd_arm() {
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let err = EnvironmentSpec::new(vec![0.0, 0.0], vec![Matrix::identity(2), bad], 10.0).unwrap_err();
        assert_eq!(err, Error::ArmNotPsd { arm: 1 });
    }

    #[test]
    fn rejects_dimension_mismatch_and_empty() {
        assert!(EnvironmentSpec::new(vec![0.0], vec![Matrix::identity(2)], 10.0).is_err());
        assert_eq!(EnvironmentSpec::new(vec![0.0], vec![], 1.0).unwrap_err(), Error::NoArms);
    }

    #[test]
    fn zero_covariance_pulls_theta() {
        let env = EnvironmentSpec::new(vec![1.0, 2.0], vec![Matrix::zeros(2)], 1.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        assert_eq!(env.pull(0, &mut rng), vec![1.0, 2.0]);
    }

    #[test]
    fn pulls_are_deterministic() {
        let env = EnvironmentSpec::scalar(0.0, &[1.0, 2.0], 2.0).unwrap();
        let a: Vec<_> = {
            let mut rng = RngStream::new(5, 1);
            (0..10).map(|i| env.pull(i % 2, &mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = RngStream::new(5, 1);
            (0..10).map(|i| env.pull(i % 2, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn scalar_pull_mean() {
        let env = EnvironmentSpec::scalar(5.0, &[1.0], 1.0).unwrap();
        let mut rng = RngStream::new(8, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| env.pull(0, &mut rng)[0]).sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() <= 0.013, "mean {mean}");
    }

    #[test]
    fn pull_covariance_matches_arm() {
        let sigma = Matrix::from_rows(&[
            vec![2.0, 0.6, 0.0],
            vec![0.6, 1.0, -0.3],
            vec![0.0, -0.3, 0.5],
        ])
        .unwrap();
        let env = EnvironmentSpec::new(vec![1.0, 0.0, -1.0], vec![sigma.clone()], 5.0).unwrap();
        let mut rng = RngStream::new(12, 0);
        let mut acc = StreamingCovariance::new(3);
        for _ in 0..100_000 {
            acc.update(&env.pull(0, &mut rng));
        }
        let cov = acc.covariance(Normalization::Unbiased).unwrap();
        let rel = cov.sub(&sigma).frobenius_norm() / sigma.frobenius_norm();
        assert!(rel < 0.02, "relative error {rel}");
    }

    #[test]
    fn fisher_info_is_inverse() {
        let env = EnvironmentSpec::diagonal(vec![0.0, 0.0], &[vec![1.0, 1.0], vec![2.0, 4.0]], 10.0).unwrap();
        assert!(env.fisher_info(0).unwrap().max_abs_diff(&Matrix::identity(2)) < 1e-15);
        assert!(env.fisher_info(1).unwrap().max_abs_diff(&Matrix::diag(&[0.5, 0.25])) < 1e-15);

        let a = Matrix::from_rows(&[vec![1.0, 0.3, -0.2], vec![0.0, 1.5, 0.4], vec![0.7, 0.1, 0.9]]).unwrap();
        let spd = a.transpose().matmul(&a).add(&Matrix::identity(3).scale(0.1));
        let env = EnvironmentSpec::new(vec![0.0; 3], vec![spd.clone()], 100.0).unwrap();
        let back = env.fisher_info(0).unwrap().matmul(&spd);
        assert!(back.max_abs_diff(&Matrix::identity(3)) < 1e-9);
    }

    #[test]
    fn fisher_info_of_singular_arm_fails() {
        let env = EnvironmentSpec::new(vec![0.0], vec![Matrix::zeros(1)], 1.0).unwrap();
        assert_eq!(env.fisher_info(0).unwrap_err(), Error::Singular);
    }

    #[test]
    fn gap_profiles() {
        let g = gap_profile(&EnvironmentSpec::scalar(0.0, &[1.0, 2.0, 3.0], 3.0).unwrap());
        assert_eq!(g.best_arm, 0);
        assert_eq!(g.gaps, vec![0.0, 1.0, 2.0]);

        let g = gap_profile(&EnvironmentSpec::scalar(0.0, &[2.0, 2.0, 2.0], 3.0).unwrap());
        assert_eq!(g.best_arm, 0);
        assert_eq!(g.gaps, vec![0.0; 3]);

        let env = EnvironmentSpec::diagonal(vec![0.0, 0.0], &[vec![1.0, 1.0], vec![0.5, 2.0]], 3.0).unwrap();
        let g = gap_profile(&env);
        assert_eq!(g.best_arm, 0);
        assert_eq!(g.traces, vec![2.0, 2.5]);
        assert_eq!(g.gaps[1], 0.5);
        assert!((g.fisher_traces[1] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn flags_definition_disagreement() {
        // traces {2, 2.5} favour arm 0; Fisher traces {2, 2.5} favour arm 1
        let env = EnvironmentSpec::diagonal(vec![0.0, 0.0], &[vec![1.0, 1.0], vec![0.5, 2.0]], 3.0).unwrap();
        assert_eq!(best_arm_disagreement(&env), Some((0, 1)));
        let scalar = EnvironmentSpec::scalar(0.0, &[3.0, 1.0, 2.0], 3.0).unwrap();
        assert_eq!(best_arm_disagreement(&scalar), None);
    }

    proptest::proptest! {
        #[test]
        fn gaps_are_nonnegative(vars in proptest::collection::vec(0.01f64..10.0, 1..8)) {
            let g = gap_profile(&EnvironmentSpec::scalar(0.0, &vars, 10.0).unwrap());
            proptest::prop_assert_eq!(g.gaps[g.best_arm], 0.0);
            proptest::prop_assert!(g.gaps.iter().all(|&x| x >= 0.0));
            // in one dimension the two best-arm definitions agree
            proptest::prop_assert_eq!(g.traces[fisher_best_arm(&g)], g.traces[g.best_arm]);
        }
    }
}
