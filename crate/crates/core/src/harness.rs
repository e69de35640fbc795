//! Seeded, parallel regret experiments and their file outputs.
//!
//! A run is fully determined by its [`ExperimentConfig`]: trajectory `rep` of
//! policy `p` draws from `derive_stream(seed, [policy_id(p), rep])`, where
//! `policy_id` is the policy's position in [`POLICY_NAMES`]. Results are
//! aggregated in `(policy, rep)` order after all trajectories finish, so the
//! worker count never changes a single output byte.
//!
//! Configuration is a flat `key=value` list; the same keys are accepted from
//! a config file, from command-line flags and from a previously written
//! `manifest.txt`:
//!
//! ```text
//! env=pareto            # pareto | gaussian
//! means=1,0.9
//! pareto-eps=0.1        # one value or one per arm
//! gauss-std=1
//! policies=rmm-ucb,mars,vanilla-ucb,mom-ucb,trunc-ucb
//! horizon=1000
//! reps=20
//! seed=1
//! workers=4
//! m-max=none
//! out=results
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bandit::{central_moment_constant, run_trajectory, ArmSpec, Environment, Policy};
use crate::error::{Error, Result};
use crate::policies::{BaselineParams, FixedArm, Mars, MomUcb, RmmUcb, TruncatedUcb, VanillaUcb};
use crate::stream::derive_stream;

/// Registered policies. The position is the policy's stream label.
pub const POLICY_NAMES: [&str; 6] = ["rmm-ucb", "mars", "vanilla-ucb", "mom-ucb", "trunc-ucb", "best-arm"];

pub const CSV_HEADER: &str = "policy,round,mean_cum_regret,std_cum_regret,reps";
pub const CSV_FILE: &str = "regret.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub const PRESETS: [&str; 3] = ["fig1a", "fig1b", "figS"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Pareto,
    Gaussian,
}

impl EnvKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::Pareto => "pareto",
            Self::Gaussian => "gaussian",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub means: Vec<f64>,
    pub pareto_eps: Vec<f64>,
    pub gauss_std: Vec<f64>,
    pub policies: Vec<String>,
    pub horizon: usize,
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
    pub m_max: Option<usize>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::Pareto,
            means: vec![1.0, 0.9],
            pareto_eps: vec![0.1],
            gauss_std: vec![1.0],
            policies: POLICY_NAMES[..5].iter().map(|s| s.to_string()).collect(),
            horizon: 1000,
            reps: 20,
            seed: 1,
            workers: 1,
            m_max: None,
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    /// Desk-scale versions of the published experiments: two symmetrized
    /// Pareto arms with means 1 and 1 - gap.
    pub fn preset(name: &str) -> Result<Self> {
        let (gap, eps) = match name {
            "fig1a" => (0.1, 0.1),
            "fig1b" => (0.5, 0.1),
            "figS" => (0.1, 0.5),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}', expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(Self {
            means: vec![1.0, 1.0 - gap],
            pareto_eps: vec![eps],
            out: PathBuf::from(format!("results/{name}")),
            ..Self::default()
        })
    }

    /// Sets one `key=value` pair. Informational manifest keys are accepted
    /// and ignored.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "env" => {
                self.env = match value {
                    "pareto" => EnvKind::Pareto,
                    "gaussian" => EnvKind::Gaussian,
                    other => return Err(Error::Config(format!("unknown env '{other}', expected pareto or gaussian"))),
                }
            }
            "means" => self.means = parse_list(key, value)?,
            "pareto-eps" => self.pareto_eps = parse_list(key, value)?,
            "gauss-std" => self.gauss_std = parse_list(key, value)?,
            "policies" => self.policies = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            "horizon" => self.horizon = parse_num(key, value)?,
            "reps" => self.reps = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "m-max" => {
                self.m_max = match value {
                    "none" | "" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "out" => self.out = PathBuf::from(value),
            "version" | "m-max-active" => {}
            other => return Err(Error::Config(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key=value` line of a config file. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.means.len();
        if k < 2 {
            return Err(Error::Config(format!("need at least 2 arm means, got {k}")));
        }
        if self.horizon < k {
            return Err(Error::Config(format!("horizon {} is shorter than the number of arms {k}", self.horizon)));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("no policies selected".into()));
        }
        for (i, name) in self.policies.iter().enumerate() {
            policy_id(name)?;
            if self.policies[..i].contains(name) {
                return Err(Error::Config(format!("policy '{name}' listed twice")));
            }
        }
        let per_arm = match self.env {
            EnvKind::Pareto => ("pareto-eps", &self.pareto_eps),
            EnvKind::Gaussian => ("gauss-std", &self.gauss_std),
        };
        if per_arm.1.len() != 1 && per_arm.1.len() != k {
            return Err(Error::Config(format!(
                "{} needs 1 or {k} values, got {}",
                per_arm.0,
                per_arm.1.len()
            )));
        }
        self.environment().map(|_| ())
    }

    pub fn environment(&self) -> Result<Environment> {
        let pick = |list: &[f64], i: usize| if list.len() == 1 { list[0] } else { list[i] };
        let arms = self
            .means
            .iter()
            .enumerate()
            .map(|(i, &mean)| match self.env {
                EnvKind::Pareto => ArmSpec::pareto(mean, pick(&self.pareto_eps, i)),
                EnvKind::Gaussian => ArmSpec::gaussian(mean, pick(&self.gauss_std, i)),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))?;
        Environment::new(arms).map_err(|e| Error::Config(e.to_string()))
    }

    /// Manifest text; parses back into an identical configuration.
    pub fn to_manifest(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "# rmm-bandit experiment manifest");
        let _ = writeln!(s, "version={}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "env={}", self.env.as_str());
        let _ = writeln!(s, "means={}", join(&self.means));
        let _ = writeln!(s, "pareto-eps={}", join(&self.pareto_eps));
        let _ = writeln!(s, "gauss-std={}", join(&self.gauss_std));
        let _ = writeln!(s, "policies={}", self.policies.join(","));
        let _ = writeln!(s, "horizon={}", self.horizon);
        let _ = writeln!(s, "reps={}", self.reps);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "workers={}", self.workers);
        let _ = writeln!(s, "m-max={}", self.m_max.map_or("none".to_string(), |m| m.to_string()));
        let _ = writeln!(s, "m-max-active={}", self.m_max_active());
        let _ = writeln!(s, "out={}", self.out.display());
        s
    }

    /// Whether the alternative-sample cap actually binds for a randomized
    /// policy in this run (and so exact coverage is not guaranteed).
    pub fn m_max_active(&self) -> bool {
        let randomized = self.policies.iter().any(|p| p == "rmm-ucb" || p == "mars");
        match self.m_max {
            Some(cap) => randomized && crate::policies::schedule_m(self.horizon) > cap,
            None => false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_num(key, v.trim())).collect()
}

pub fn policy_id(name: &str) -> Result<usize> {
    POLICY_NAMES.iter().position(|&p| p == name).ok_or_else(|| {
        Error::Config(format!("unknown policy '{name}', valid policies: {}", POLICY_NAMES.join(", ")))
    })
}

/// Oracle moment parameters for the baselines: `a = min(eps, 1)` and
/// `M = E|reward|^(1+a)` for Pareto arms, `a = 1` for Gaussian arms.
pub fn baseline_params(env: &Environment) -> Result<Vec<BaselineParams>> {
    env.arms()
        .iter()
        .map(|arm| {
            let a = match *arm {
                ArmSpec::SymmetrizedPareto { eps, .. } => eps.min(1.0),
                ArmSpec::Gaussian { .. } => 1.0,
            };
            BaselineParams::new(central_moment_constant(arm, a)?, a)
        })
        .collect()
}

pub fn build_policy(name: &str, env: &Environment, m_max: Option<usize>) -> Result<Box<dyn Policy>> {
    Ok(match name {
        "rmm-ucb" => Box::new(RmmUcb::with_m_cap(m_max)),
        "mars" => Box::new(Mars::with_m_cap(m_max)),
        "vanilla-ucb" => Box::new(VanillaUcb),
        "mom-ucb" => Box::new(MomUcb::new(baseline_params(env)?)),
        "trunc-ucb" => Box::new(TruncatedUcb::new(baseline_params(env)?)),
        "best-arm" => Box::new(FixedArm::new(env.best_arm())),
        other => {
            policy_id(other)?;
            unreachable!("registered policy without a constructor")
        }
    })
}

/// Per-round mean and sample standard deviation of cumulative pseudo-regret.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateCurve {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub reps: usize,
}

impl AggregateCurve {
    /// Aggregates equally long curves in the given order.
    pub fn from_curves(curves: &[Vec<f64>]) -> Self {
        let reps = curves.len();
        assert!(reps > 0, "nothing to aggregate");
        let horizon = curves[0].len();
        let mut mean = vec![0.0; horizon];
        let mut std = vec![0.0; horizon];
        for t in 0..horizon {
            let mut sum = 0.0;
            for c in curves {
                sum += c[t];
            }
            let mu = sum / reps as f64;
            mean[t] = mu;
            if reps > 1 {
                let mut ss = 0.0;
                for c in curves {
                    ss += (c[t] - mu) * (c[t] - mu);
                }
                std[t] = (ss / (reps - 1) as f64).sqrt();
            }
        }
        Self { mean, std, reps }
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("nonempty curve")
    }
}

/// Curves per policy, in the configuration's policy order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResults {
    pub curves: Vec<(String, AggregateCurve)>,
}

impl ExperimentResults {
    pub fn get(&self, policy: &str) -> Option<&AggregateCurve> {
        self.curves.iter().find(|(p, _)| p == policy).map(|(_, c)| c)
    }
}

/// Raw pseudo-regret trajectories, indexed `[policy][rep]`.
pub fn run_trajectories(config: &ExperimentConfig) -> Result<Vec<Vec<Vec<f64>>>> {
    config.validate()?;
    let env = config.environment()?;
    let policies = config
        .policies
        .iter()
        .map(|name| Ok((policy_id(name)? as u64, build_policy(name, &env, config.m_max)?)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..policies.len()).flat_map(|p| (0..config.reps).map(move |r| (p, r))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    let runs: Vec<Result<Vec<f64>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, rep)| {
                let (id, policy) = &policies[p];
                let mut stream = derive_stream(config.seed, &[*id, rep as u64]);
                run_trajectory(&env, policy.as_ref(), config.horizon, &mut stream).map(|t| t.pseudo_regret)
            })
            .collect()
    });

    let mut out: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(config.reps); policies.len()];
    for (&(p, _), run) in jobs.iter().zip(runs) {
        out[p].push(run?);
    }
    Ok(out)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    let trajectories = run_trajectories(config)?;
    let curves = config
        .policies
        .iter()
        .zip(&trajectories)
        .map(|(name, runs)| (name.clone(), AggregateCurve::from_curves(runs)))
        .collect();
    Ok(ExperimentResults { curves })
}

/// CSV body in the fixed schema, LF line endings, shortest round-trip floats.
pub fn render_csv(results: &ExperimentResults) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (policy, curve) in &results.curves {
        for (t, (mean, std)) in curve.mean.iter().zip(&curve.std).enumerate() {
            let _ = writeln!(s, "{policy},{},{mean},{std},{}", t + 1, curve.reps);
        }
    }
    s
}

/// Writes `regret.csv` and `manifest.txt` into `config.out`.
pub fn write_outputs(results: &ExperimentResults, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    if results.curves.is_empty() {
        return Err(Error::Config("no results to write".into()));
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(&config.out).map_err(io(&config.out))?;
    let csv = config.out.join(CSV_FILE);
    fs::write(&csv, render_csv(results)).map_err(io(&csv))?;
    let manifest = config.out.join(MANIFEST_FILE);
    fs::write(&manifest, config.to_manifest()).map_err(io(&manifest))?;
    Ok(vec![csv, manifest])
}

/// Gnuplot script drawing one mean-regret line per policy from a CSV.
pub fn gnuplot_script(csv: &Path, policies: &[String], title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set title '{}'", title.replace('\'', "''"));
    let _ = writeln!(s, "set xlabel 'round'");
    let _ = writeln!(s, "set ylabel 'mean cumulative pseudo-regret'");
    let _ = writeln!(s, "set key left top");
    let _ = writeln!(s, "data = '{}'", csv.display().to_string().replace('\'', "''"));
    let _ = writeln!(s, "policies = \"{}\"", policies.join(" "));
    let _ = writeln!(
        s,
        "plot for [p in policies] data every ::1 using 2:(strcol(1) eq p ? $3 : 1/0) with lines title p"
    );
    s
}

/// Distinct policy names in a regret CSV, in order of appearance.
pub fn csv_policies(csv_text: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for line in csv_text.lines().skip(1) {
        if let Some(name) = line.split(',').next() {
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
    }
    names
}
