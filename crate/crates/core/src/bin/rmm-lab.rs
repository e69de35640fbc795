use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmm_bandit::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "rmm-lab", version, about = "Heavy-tailed bandit regret experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write regret.csv and manifest.txt.
    Run(Box<RunArgs>),
    /// Emit a gnuplot script that plots a regret.csv.
    Gnuplot {
        /// CSV written by `run`.
        csv: PathBuf,
        /// Write the script here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "cumulative pseudo-regret")]
        title: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Start from a named preset (fig1a, fig1b, figS).
    #[arg(long)]
    preset: Option<String>,
    /// key=value config file (a manifest.txt works too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// pareto | gaussian
    #[arg(long)]
    env: Option<String>,
    /// Comma-separated arm means.
    #[arg(long)]
    means: Option<String>,
    #[arg(long)]
    pareto_eps: Option<String>,
    #[arg(long)]
    gauss_std: Option<String>,
    /// Comma-separated policy names.
    #[arg(long)]
    policies: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Cap on the alternative-sample count (voids exact coverage), or "none".
    #[arg(long)]
    m_max: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> rmm_bandit::Result<()> {
    let mut config = match &args.preset {
        Some(name) => ExperimentConfig::preset(name)?,
        None => ExperimentConfig::default(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|source| rmm_bandit::Error::Io { path: path.clone(), source })?;
        config.apply_text(&text)?;
    }
    let flags = [
        ("env", &args.env),
        ("means", &args.means),
        ("pareto-eps", &args.pareto_eps),
        ("gauss-std", &args.gauss_std),
        ("policies", &args.policies),
        ("horizon", &args.horizon),
        ("reps", &args.reps),
        ("seed", &args.seed),
        ("workers", &args.workers),
        ("m-max", &args.m_max),
    ];
    for (key, value) in flags {
        if let Some(value) = value {
            config.set(key, value)?;
        }
    }
    if let Some(out) = args.out {
        config.out = out;
    }
    config.validate()?;

    let results = harness::run_experiment(&config)?;
    for path in harness::write_outputs(&results, &config)? {
        println!("wrote {}", path.display());
    }
    for (policy, curve) in &results.curves {
        println!("{policy:>12}  final mean regret {:.3}", curve.final_mean());
    }
    Ok(())
}

fn gnuplot(csv: PathBuf, out: Option<PathBuf>, title: String) -> rmm_bandit::Result<()> {
    let text = std::fs::read_to_string(&csv).map_err(|source| rmm_bandit::Error::Io { path: csv.clone(), source })?;
    let script = harness::gnuplot_script(&csv, &harness::csv_policies(&text), &title);
    match out {
        Some(path) => std::fs::write(&path, script).map_err(|source| rmm_bandit::Error::Io { path, source }),
        None => {
            print!("{script}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(*args),
        Command::Gnuplot { csv, out, title } => gnuplot(csv, out, title),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rmm-lab: {e}");
            ExitCode::FAILURE
        }
    }
}
