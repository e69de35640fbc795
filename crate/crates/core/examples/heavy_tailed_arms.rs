//! Reward distributions of the bandit environments and the moment
//! constants handed to the oracle-tuned baselines.

use rmm_bandit::bandit::{central_moment_constant, ArmSpec, Environment};
use rmm_bandit::derive_stream;

fn main() -> rmm_bandit::Result<()> {
    let env = Environment::new(vec![ArmSpec::pareto(1.0, 0.1)?, ArmSpec::pareto(0.9, 0.5)?, ArmSpec::gaussian(0.8, 1.0)?])?;
    println!("best arm {} with gaps {:?}", env.best_arm(), env.gaps());

    let mut rng = derive_stream(3, &[]);
    for (i, arm) in env.arms().iter().enumerate() {
        let mut draws: Vec<f64> = (0..100_000).map(|_| arm.sample(&mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let q = |p: f64| draws[((draws.len() - 1) as f64 * p) as usize];
        let a = arm.pareto_shape().map_or(1.0, |shape| (shape - 1.05).min(1.0));
        println!(
            "arm {i}: {arm:?}\n  quantiles 1% {:.3}  50% {:.3}  99% {:.3}  max {:.1}\n  E|X|^(1+{a:.2}) = {:.6}",
            q(0.01),
            q(0.5),
            q(0.99),
            draws[draws.len() - 1],
            central_moment_constant(arm, a)?
        );
    }
    Ok(())
}
