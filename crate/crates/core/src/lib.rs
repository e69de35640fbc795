//! Robust stochastic multi-armed bandits under heavy tails.
//!
//! The centerpiece is the one-sided resampled median-of-means (RMM) test and
//! the upper confidence bound it induces: for a sample from a distribution
//! that is symmetric about its mean, the bound has exact, non-asymptotic
//! coverage `1 - r/m` and needs no moment parameters. The [`policies`] module
//! turns it into the anytime, parameter-free RMM-UCB bandit policy.
//!
//! Module map:
//!
//! - [`estimators`]: empirical median, block partitions, median-of-means,
//!   empirical and truncated means.
//! - [`rmm`]: sign assignments, the rank test, the closed-form upper bound
//!   and a brute-force grid oracle for it.
//! - [`bandit`]: arm distributions (symmetrized Pareto, Gaussian), moment
//!   constants, the interaction loop and pseudo-regret accounting.
//! - [`policies`]: RMM-UCB, MARS, vanilla UCB, MoM-UCB, truncated-mean UCB.
//! - [`harness`]: seeded stream derivation, parallel experiments, CSV and
//!   manifest output.
//!
//! See `examples/` for one runnable program per capability.

pub mod bandit;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod policies;
mod quadrature;
pub mod rmm;
pub mod stream;

pub use error::{Error, Result};
pub use estimators::Dataset;
pub use rmm::{ConfidenceSpec, ExtendedReal, RmmContext};
pub use stream::{derive_stream, Stream};
