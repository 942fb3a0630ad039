//! Simulation lab for sequential estimation of a shared Gaussian mean from
//! `k` sources with different covariances.
//!
//! A policy picks one source per round; after `n` rounds the sample mean of
//! everything collected estimates `θ`. Regret is the excess MSE over always
//! using the lowest-trace source. The crate provides the LCB policy and
//! baselines, regret accounting under both decompositions, Monte-Carlo
//! checks of the upper-bound machinery and of the two-environment lower
//! bound, and a config-driven experiment harness.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod environment;
mod error;
pub mod harness;
pub mod lowerbound;
pub mod numkit;
pub mod policies;
pub mod regret;
pub mod runner;

pub use environment::{gap_profile, EnvironmentSpec, GapProfile, PullRecord};
pub use error::{Error, Result};
pub use numkit::{Matrix, Normalization, PsdMatrix, RngStream};
pub use policies::{run_episode, LcbState, PolicyKind};
pub use regret::{Estimate, RegretReport};
