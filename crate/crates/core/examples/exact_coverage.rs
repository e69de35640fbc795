//! Monte Carlo check that the test rejects the true mean with probability
//! exactly `r / m`, whatever the sample size or the tail of the data.
//!
//! ```text
//! cargo run --release --example exact_coverage
//! ```

use rand::Rng;
use rand_distr::StandardNormal;

use rmm_bandit::bandit::ArmSpec;
use rmm_bandit::rmm::{build_context, rmm_test, ConfidenceSpec, TestOutcome};
use rmm_bandit::{derive_stream, Dataset};

fn main() -> rmm_bandit::Result<()> {
    let trials = 20_000;
    let pareto = ArmSpec::pareto(0.0, 0.1)?;
    println!("{:>10} {:>4} {:>3} {:>8} {:>10} {:>8}", "data", "n", "k", "r/m", "rejected", "4 SE");
    for (label, heavy) in [("normal", false), ("pareto", true)] {
        for (n, k) in [(5, 1), (15, 3), (60, 6)] {
            for (r, m) in [(1, 20), (5, 20)] {
                let conf = ConfidenceSpec::new(r, m)?;
                let mut rng = derive_stream(31, &[n as u64, k as u64, r as u64, heavy as u64]);
                let mut rejected = 0;
                for _ in 0..trials {
                    let values = (0..n)
                        .map(|_| if heavy { pareto.sample(&mut rng) } else { rng.sample(StandardNormal) })
                        .collect();
                    let ctx = build_context(Dataset::new(values)?, conf, k, &mut rng)?;
                    if rmm_test(&ctx, 0.0) == TestOutcome::Reject {
                        rejected += 1;
                    }
                }
                let p = conf.level();
                let se = (p * (1.0 - p) / trials as f64).sqrt();
                println!(
                    "{label:>10} {n:>4} {k:>3} {p:>8.3} {:>10.4} {:>8.4}",
                    rejected as f64 / trials as f64,
                    4.0 * se
                );
            }
        }
    }
    Ok(())
}
