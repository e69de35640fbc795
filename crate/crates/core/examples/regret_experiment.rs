//! Runs a small replicated experiment through the harness and writes
//! `regret.csv`, `manifest.txt` and a gnuplot script into a directory
//! (default `results/example`).
//!
//! ```text
//! cargo run --release --example regret_experiment -- /tmp/regret
//! gnuplot -p /tmp/regret/plot.gp
//! ```

use std::path::PathBuf;

use rmm_bandit::harness::{self, ExperimentConfig};

fn main() -> rmm_bandit::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| PathBuf::from("results/example"), PathBuf::from);
    let mut config = ExperimentConfig::preset("fig1b")?;
    config.horizon = 300;
    config.reps = 4;
    config.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    config.out = out.clone();

    let results = harness::run_experiment(&config)?;
    for (policy, curve) in &results.curves {
        let t = curve.mean.len() - 1;
        println!("{policy:>12}: {:.2} +- {:.2}", curve.mean[t], curve.std[t]);
    }
    let written = harness::write_outputs(&results, &config)?;
    let csv = &written[0];
    let script = harness::gnuplot_script(csv, &config.policies, "cumulative pseudo-regret");
    let plot = out.join("plot.gp");
    std::fs::write(&plot, script).map_err(|source| rmm_bandit::Error::Io { path: plot.clone(), source })?;
    println!("wrote {} and {}", csv.display(), plot.display());
    Ok(())
}
