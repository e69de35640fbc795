//! Median-of-means against the sample mean and the truncated mean on
//! heavy-tailed data.
//!
//! Draws repeated samples from a symmetrized Pareto arm whose variance is
//! infinite and reports how far each estimator lands from the true mean.
//!
//! ```text
//! cargo run --example median_of_means
//! ```

use rmm_bandit::bandit::{central_moment_constant, ArmSpec};
use rmm_bandit::estimators::{empirical_mean, mom, partition_blocks, truncated_mean};
use rmm_bandit::derive_stream;

fn main() -> rmm_bandit::Result<()> {
    let arm = ArmSpec::pareto(1.0, 0.1)?;
    let (n, k, reps) = (400, 20, 2000);
    let a = 0.1;
    let moment = central_moment_constant(&arm, a)?;
    let delta = 0.01;

    let blocks = partition_blocks(n, k)?;
    println!("n={n} split into {} blocks of sizes {:?}..", blocks.num_blocks(), &blocks.sizes()[..3]);

    let mut errors = [Vec::new(), Vec::new(), Vec::new()];
    let mut rng = derive_stream(2024, &[]);
    for _ in 0..reps {
        let sample: Vec<f64> = (0..n).map(|_| arm.sample(&mut rng)).collect();
        errors[0].push((empirical_mean(&sample)? - 1.0).abs());
        errors[1].push((mom(&sample, k)? - 1.0).abs());
        errors[2].push((truncated_mean(&sample, moment, a, delta)? - 1.0).abs());
    }

    println!("{:>16} {:>10} {:>10} {:>10}", "estimator", "median", "q90", "q99");
    for (name, errs) in ["sample mean", "median-of-means", "truncated mean"].iter().zip(errors.iter_mut()) {
        errs.sort_by(f64::total_cmp);
        let q = |p: f64| errs[((errs.len() - 1) as f64 * p) as usize];
        println!("{name:>16} {:>10.4} {:>10.4} {:>10.4}", q(0.5), q(0.9), q(0.99));
    }
    Ok(())
}
