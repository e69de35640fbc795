//! One bandit run per policy on the same two-armed heavy-tailed problem,
//! printing how often each policy chose the better arm and its regret.
//!
//! The resampled policies rebuild their confidence bounds every round, so
//! use `--release` and expect a few seconds per policy.

use rmm_bandit::bandit::{run_trajectory, ArmSpec, Environment};
use rmm_bandit::harness::{build_policy, POLICY_NAMES};
use rmm_bandit::derive_stream;

fn main() -> rmm_bandit::Result<()> {
    let env = Environment::new(vec![ArmSpec::pareto(1.0, 0.1)?, ArmSpec::pareto(0.5, 0.1)?])?;
    let horizon = 400;
    for name in POLICY_NAMES {
        let policy = build_policy(name, &env, None)?;
        let run = run_trajectory(&env, policy.as_ref(), horizon, &mut derive_stream(11, &[]))?;
        let best = run.arms.iter().filter(|&&a| a == env.best_arm()).count();
        println!(
            "{name:>12}: best arm {best:>3}/{horizon}, regret at 100 {:>6.1}, at {horizon} {:>6.1}",
            run.pseudo_regret[99],
            run.pseudo_regret[horizon - 1]
        );
    }
    Ok(())
}
