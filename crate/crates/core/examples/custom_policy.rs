//! Plugging a new policy into the simulation loop. Policies see only the
//! round number and the reward histories, plus a per-round random stream.

use rand::Rng;

use rmm_bandit::bandit::{run_trajectory, ArmSpec, Environment, Policy, RoundView};
use rmm_bandit::estimators::mom;
use rmm_bandit::derive_stream;

/// Explores uniformly with probability `1/sqrt(t)`, otherwise exploits the
/// arm with the best median-of-means.
struct DecayingGreedy;

impl Policy for DecayingGreedy {
    fn name(&self) -> &str {
        "decaying-greedy"
    }

    fn choose(&self, view: &RoundView) -> usize {
        let mut rng = view.stream(0);
        if rng.random::<f64>() < 1.0 / (view.round as f64).sqrt() {
            return rng.random_range(0..view.num_arms());
        }
        let score = |h: &[f64]| mom(h, (h.len() as f64).sqrt() as usize).expect("every arm was pulled");
        (0..view.num_arms())
            .max_by(|&a, &b| score(&view.histories[a]).total_cmp(&score(&view.histories[b])))
            .expect("at least two arms")
    }
}

fn main() -> rmm_bandit::Result<()> {
    let env = Environment::new(vec![ArmSpec::pareto(0.5, 0.2)?, ArmSpec::pareto(1.0, 0.2)?, ArmSpec::gaussian(0.7, 2.0)?])?;
    let run = run_trajectory(&env, &DecayingGreedy, 2000, &mut derive_stream(5, &[]))?;
    let mut pulls = vec![0; env.num_arms()];
    for &arm in &run.arms {
        pulls[arm] += 1;
    }
    println!("pulls per arm {pulls:?}, final pseudo-regret {:.1}", run.pseudo_regret.last().unwrap());
    Ok(())
}
