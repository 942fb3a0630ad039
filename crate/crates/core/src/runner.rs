//! Parallel replication driver.
//!
//! Replication `r` always draws from `RngStream::new(root_seed, r)` and
//! results are collected in replication order, so output is identical for
//! any number of worker threads.

use rayon::prelude::*;

use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::numkit::{Normalization, RngStream};
use crate::policies::{run_episode_with, EpisodeOutcome, PolicyKind};
use crate::regret::ReplicationSummary;

/// Runs `f` inside a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Maps `f` over replication indices in parallel, preserving order.
pub fn par_replicate<T, F>(reps: usize, root_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(root_seed, r as u64);
            f(r, &mut rng)
        })
        .collect()
}

pub fn run_outcomes(
    env: &EnvironmentSpec,
    policy: PolicyKind,
    n: usize,
    reps: usize,
    root_seed: u64,
    normalization: Normalization,
) -> Result<Vec<EpisodeOutcome>> {
    par_replicate(reps, root_seed, |_, rng| {
        run_episode_with(env, policy, n, normalization, rng, |_, _, _| {})
    })
}

pub fn run_replications(
    env: &EnvironmentSpec,
    policy: PolicyKind,
    n: usize,
    reps: usize,
    root_seed: u64,
    normalization: Normalization,
) -> Result<Vec<ReplicationSummary>> {
    par_replicate(reps, root_seed, |_, rng| {
        let out = run_episode_with(env, policy, n, normalization, rng, |_, _, _| {})?;
        Ok(ReplicationSummary::from_outcome(&out, env.theta()))
    })
}
