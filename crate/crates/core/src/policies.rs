//! Arm-selection policies and the episode runner.
//!
//! [`LcbState`] is shared by every policy: it tracks per-arm pull counts,
//! streaming covariance of each arm's samples and the resulting trace
//! estimates. LCB turns these into lower confidence bounds on `Tr(Σ_i)` and
//! pulls the arm whose bound is smallest.

use serde::{Deserialize, Serialize};

use crate::environment::{EnvironmentSpec, PullRecord};
use crate::error::{Error, Result};
use crate::numkit::{Normalization, RngStream, StreamingCovariance};

/// `max{(d-1)², 2}`, the exponent of the default confidence schedule.
pub fn schedule_exponent(d: usize) -> f64 {
    let dm1 = d.saturating_sub(1) as f64;
    (dm1 * dm1).max(2.0)
}

/// `δ = 2 / n^{max{(d-1)², 2}}`. Underflows to zero for large `d`; use
/// [`default_log_term`] for the index.
pub fn default_delta(n: usize, d: usize) -> f64 {
    2.0 / (n as f64).powf(schedule_exponent(d))
}

/// `log(2/δ)` under the default schedule, computed without forming `δ`.
pub fn default_log_term(n: usize, d: usize) -> f64 {
    schedule_exponent(d) * (n as f64).ln()
}

/// `Γ·√(8·log(2/δ)/T)`.
pub fn confidence_width(gamma: f64, log_term: f64, count: u64) -> f64 {
    gamma * (8.0 * log_term / count as f64).sqrt()
}

/// `tr̂ - Γ√(8 log(2/δ)/T)`, or `-∞` for an arm that has never been pulled.
pub fn lcb_value(trace_estimate: f64, count: u64, gamma: f64, log_term: f64) -> f64 {
    if count == 0 {
        f64::NEG_INFINITY
    } else {
        trace_estimate - confidence_width(gamma, log_term, count)
    }
}

#[derive(Clone, Debug)]
pub struct LcbState {
    counts: Vec<u64>,
    stats: Vec<StreamingCovariance>,
    traces: Vec<f64>,
    delta: f64,
    log_term: f64,
    gamma: f64,
    horizon: usize,
    round: usize,
    normalization: Normalization,
}

impl LcbState {
    /// Fresh state with the default `δ` schedule for horizon `n`.
    pub fn new(env: &EnvironmentSpec, horizon: usize, normalization: Normalization) -> Self {
        let (d, k) = (env.d(), env.k());
        Self {
            counts: vec![0; k],
            stats: (0..k).map(|_| StreamingCovariance::new(d)).collect(),
            traces: vec![0.0; k],
            delta: default_delta(horizon, d),
            log_term: default_log_term(horizon, d),
            gamma: env.gamma(),
            horizon,
            round: 0,
            normalization,
        }
    }

    /// Overrides the confidence parameter (`0 < δ < 1` expected).
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self.log_term = (2.0 / delta).ln();
        self
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn trace_estimates(&self) -> &[f64] {
        &self.traces
    }

    pub fn arm_stats(&self, arm: usize) -> &StreamingCovariance {
        &self.stats[arm]
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `log(2/δ)`.
    pub fn log_term(&self) -> f64 {
        self.log_term
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// LCB index of `arm` under the state's own `δ`.
    pub fn index(&self, arm: usize) -> f64 {
        lcb_value(self.traces[arm], self.counts[arm], self.gamma, self.log_term)
    }

    /// LCB index of `arm` under an explicit `δ`.
    pub fn index_at(&self, arm: usize, delta: f64) -> f64 {
        lcb_value(self.traces[arm], self.counts[arm], self.gamma, (2.0 / delta).ln())
    }

    pub fn update(&mut self, arm: usize, sample: &[f64]) {
        self.counts[arm] += 1;
        self.round += 1;
        let acc = &mut self.stats[arm];
        acc.update(sample);
        self.traces[arm] = acc.trace_estimate(self.normalization);
    }

    fn first_unpulled(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c == 0)
    }
}

fn argmin_by(k: usize, mut value: impl FnMut(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_value = value(0);
    for i in 1..k {
        let v = value(i);
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicyKind {
    Lcb,
    /// Round-robin.
    Uniform,
    /// Follow the smallest trace estimate after one pull per arm.
    Greedy,
    EpsilonGreedy { epsilon: f64 },
    /// Always pulls `best_arm`.
    Oracle { best_arm: usize },
}

impl PolicyKind {
    pub fn name(&self) -> String {
        match self {
            PolicyKind::Lcb => "lcb".into(),
            PolicyKind::Uniform => "uniform".into(),
            PolicyKind::Greedy => "greedy".into(),
            PolicyKind::EpsilonGreedy { epsilon } => format!("epsilon-greedy({epsilon})"),
            PolicyKind::Oracle { best_arm } => format!("oracle({})", best_arm + 1),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match *self {
            PolicyKind::EpsilonGreedy { epsilon } if !(0.0..=1.0).contains(&epsilon) => Err(
                Error::InvalidArgument(format!("epsilon must lie in [0, 1], got {epsilon}")),
            ),
            PolicyKind::Oracle { best_arm } if best_arm >= k => Err(Error::InvalidArgument(
                format!("oracle arm {best_arm} out of range for k = {k}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn select_arm(&self, state: &LcbState, rng: &mut RngStream) -> usize {
        let k = state.k();
        match *self {
            PolicyKind::Lcb => argmin_by(k, |i| state.index(i)),
            PolicyKind::Uniform => state.round % k,
            PolicyKind::Greedy => greedy_arm(state),
            PolicyKind::EpsilonGreedy { epsilon } => {
                if rng.uniform() < epsilon {
                    rng.below(k)
                } else {
                    greedy_arm(state)
                }
            }
            PolicyKind::Oracle { best_arm } => best_arm,
        }
    }
}

fn greedy_arm(state: &LcbState) -> usize {
    state
        .first_unpulled()
        .unwrap_or_else(|| argmin_by(state.k(), |i| state.traces[i]))
}

/// Final outputs of one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub counts: Vec<u64>,
    /// Arithmetic mean of all `n` samples.
    pub theta_hat: Vec<f64>,
}

/// Runs `n` rounds, calling `observe` with each round's record. Avoids
/// materializing the history when the caller only needs summaries.
pub fn run_episode_with<F>(
    env: &EnvironmentSpec,
    policy: PolicyKind,
    n: usize,
    normalization: Normalization,
    rng: &mut RngStream,
    mut observe: F,
) -> Result<EpisodeOutcome>
where
    F: FnMut(usize, usize, &[f64]),
{
    if n < 1 {
        return Err(Error::HorizonTooSmall(n));
    }
    policy.validate(env.k())?;
    let d = env.d();
    let mut state = LcbState::new(env, n, normalization);
    let mut sum = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut x = vec![0.0; d];
    for round in 1..=n {
        let arm = policy.select_arm(&state, rng);
        env.pull_into(arm, rng, &mut z, &mut x);
        for (s, xi) in sum.iter_mut().zip(&x) {
            *s += xi;
        }
        state.update(arm, &x);
        observe(round, arm, &x);
    }
    Ok(EpisodeOutcome {
        counts: state.counts,
        theta_hat: sum.into_iter().map(|s| s / n as f64).collect(),
    })
}

/// Runs an episode and returns the full pull history alongside the outcome.
pub fn run_episode(
    env: &EnvironmentSpec,
    policy: PolicyKind,
    n: usize,
    normalization: Normalization,
    rng: &mut RngStream,
) -> Result<(Vec<PullRecord>, EpisodeOutcome)> {
    let mut history = Vec::with_capacity(n);
    let outcome = run_episode_with(env, policy, n, normalization, rng, |round, arm, x| {
        history.push(PullRecord {
            round,
            arm,
            sample: x.to_vec(),
        })
    })?;
    Ok((history, outcome))
}
