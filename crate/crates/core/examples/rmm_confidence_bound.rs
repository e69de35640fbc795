//! Builds one resampled median-of-means context, evaluates the test at a
//! few hypotheses and compares the closed-form upper bound with a brute
//! force grid search.

use rmm_bandit::rmm::{
    build_context, default_oracle_bounds, rank, rmm_test, rmm_ucb, rmm_ucb_oracle, ConfidenceSpec,
};
use rmm_bandit::{derive_stream, Dataset};

fn main() -> rmm_bandit::Result<()> {
    let data = Dataset::new(vec![0.8, 1.3, -0.2, 2.9, 0.4, 1.1, 0.7, -1.5, 1.9, 0.6, 1.0, 0.2])?;
    // level r/m = 1/20, three blocks
    let conf = ConfidenceSpec::new(1, 20)?;
    let mut rng = derive_stream(7, &[]);
    let ctx = build_context(data, conf, 3, &mut rng)?;

    let u = rmm_ucb(&ctx)?;
    println!("median-of-means of the sample: {:.4}", ctx.mom0());
    println!("95% upper confidence bound:     {u}");

    for theta in [0.0, 0.5, 1.0, 1.5, 2.0] {
        println!("theta = {theta:4.1}: rank {:2} of {} -> {:?}", rank(&ctx, theta), conf.m(), rmm_test(&ctx, theta));
    }

    let (lo, hi) = default_oracle_bounds(ctx.data());
    let steps = 100_000;
    let grid = rmm_ucb_oracle(&ctx, lo, hi, steps)?;
    println!("grid search on [{lo:.2}, {hi:.2}]: {grid} (step {:.2e})", (hi - lo) / (steps - 1) as f64);
    Ok(())
}
