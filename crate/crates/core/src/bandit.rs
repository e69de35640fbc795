//! Reward environments, the policy interface and the interaction loop.

use rand::distr::OpenClosed01;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::estimators::Dataset;
use crate::quadrature::integrate;
use crate::stream::{derive_stream, Stream};

/// Offset added to the Pareto tail parameter: shape = `PARETO_BASE_SHAPE + eps`.
pub const PARETO_BASE_SHAPE: f64 = 1.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArmSpec {
    /// `mean + S (X - 1)` with `S` a fair sign and `X ~ Pareto(scale 1, shape 1.05 + eps)`.
    SymmetrizedPareto { mean: f64, eps: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl ArmSpec {
    pub fn pareto(mean: f64, eps: f64) -> Result<Self> {
        if !mean.is_finite() || !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("symmetrized Pareto arm needs finite mean and eps > 0, got mean={mean}, eps={eps}")));
        }
        Ok(Self::SymmetrizedPareto { mean, eps })
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() || !(std > 0.0 && std.is_finite()) {
            return Err(invalid(format!("Gaussian arm needs finite mean and std > 0, got mean={mean}, std={std}")));
        }
        Ok(Self::Gaussian { mean, std })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::SymmetrizedPareto { mean, .. } | Self::Gaussian { mean, .. } => mean,
        }
    }

    /// Pareto shape `alpha_p`; `None` for Gaussian arms.
    pub fn pareto_shape(&self) -> Option<f64> {
        match *self {
            Self::SymmetrizedPareto { eps, .. } => Some(PARETO_BASE_SHAPE + eps),
            Self::Gaussian { .. } => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::SymmetrizedPareto { .. } => {
                let u: f64 = rng.sample(OpenClosed01);
                let positive = rng.next_u32() & 1 == 1;
                self.pareto_reward(u, positive)
            }
            Self::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
        }
    }

    /// Symmetrized Pareto reward for quantile `u` in `(0, 1]` and sign.
    pub fn pareto_reward(&self, u: f64, positive: bool) -> f64 {
        let Self::SymmetrizedPareto { mean, eps } = *self else {
            panic!("pareto_reward called on a non-Pareto arm");
        };
        let x = u.powf(-1.0 / (PARETO_BASE_SHAPE + eps));
        if positive {
            mean + (x - 1.0)
        } else {
            mean - (x - 1.0)
        }
    }
}

pub fn sample_reward<R: Rng + ?Sized>(arm: &ArmSpec, rng: &mut R) -> f64 {
    arm.sample(rng)
}

/// Mean of the arm. The symmetrized part has mean zero.
pub fn true_mean(arm: &ArmSpec) -> f64 {
    arm.mean()
}

/// Mean of a raw `Pareto(1, shape)` variable, `shape / (shape - 1)`.
pub fn pareto_mean(shape: f64) -> f64 {
    shape / (shape - 1.0)
}

/// `E|reward|^(1+a)` by adaptive quadrature, relative error well below 1e-6.
///
/// For the symmetrized Pareto arm the substitution `U = v^q` with
/// `q = alpha / (alpha - p)`, `p = 1 + a`, turns the expectation over the
/// Pareto quantile into the bounded integral
///
/// ```text
/// q/2 ∫_0^1 |1 + (mu - 1) w|^p + |1 - (mu + 1) w|^p dv,   w = v^(1 / (alpha - p)).
/// ```
pub fn central_moment_constant(arm: &ArmSpec, a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(invalid(format!("moment order a={a} must lie in (0, 1]")));
    }
    let p = 1.0 + a;
    const TOL: f64 = 1e-11;
    match *arm {
        ArmSpec::SymmetrizedPareto { mean, eps } => {
            let shape = PARETO_BASE_SHAPE + eps;
            if p >= shape {
                return Err(Error::MomentDoesNotExist { order: p, shape });
            }
            let gap = shape - p;
            let q = shape / gap;
            let integrand = |v: f64| {
                let w = v.powf(1.0 / gap);
                0.5 * q * ((1.0 + (mean - 1.0) * w).abs().powf(p) + (1.0 - (mean + 1.0) * w).abs().powf(p))
            };
            // kinks where either bracket vanishes
            let mut cuts = vec![0.0, 1.0];
            for w in [1.0 / (mean + 1.0), 1.0 / (1.0 - mean)] {
                if w.is_finite() && w > 0.0 && w < 1.0 {
                    cuts.push(w.powf(gap));
                }
            }
            Ok(integrate_pieces(integrand, cuts, TOL))
        }
        ArmSpec::Gaussian { mean, std } => {
            let density = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let integrand = |z: f64| (mean + std * z).abs().powf(p) * density(z);
            let mut cuts = vec![-40.0, 0.0, 40.0];
            let kink = -mean / std;
            if kink.abs() < 40.0 {
                cuts.push(kink);
            }
            Ok(integrate_pieces(integrand, cuts, TOL))
        }
    }
}

fn integrate_pieces<F: Fn(f64) -> f64>(f: F, mut cuts: Vec<f64>, tol: f64) -> f64 {
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| integrate(&f, w[0], w[1], tol)).sum()
}

/// Arms plus the derived gaps `max_j mu_j - mu_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    arms: Vec<ArmSpec>,
    gaps: Vec<f64>,
}

impl Environment {
    pub fn new(arms: Vec<ArmSpec>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(invalid(format!("an environment needs at least 2 arms, got {}", arms.len())));
        }
        let best = arms.iter().map(ArmSpec::mean).fold(f64::NEG_INFINITY, f64::max);
        let gaps = arms.iter().map(|arm| best - arm.mean()).collect();
        Ok(Self { arms, gaps })
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Lowest-index arm with zero gap.
    pub fn best_arm(&self) -> usize {
        self.gaps.iter().position(|&g| g == 0.0).expect("some arm attains the maximum")
    }
}

/// What a policy sees at round `round`: its own reward histories and a
/// per-trajectory key for deriving its randomness. No environment truths.
#[derive(Clone, Copy, Debug)]
pub struct RoundView<'a> {
    pub round: usize,
    pub histories: &'a [Dataset],
    pub seed: u64,
}

impl RoundView<'_> {
    pub fn num_arms(&self) -> usize {
        self.histories.len()
    }

    /// Independent stream for `(round, label)`.
    pub fn stream(&self, label: u64) -> Stream {
        derive_stream(self.seed, &[self.round as u64, label])
    }
}

pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    /// Arm to pull at `view.round`. Called only after every arm has one
    /// observation.
    fn choose(&self, view: &RoundView<'_>) -> usize;
}

/// Per-arm histories and pull counts after `round - 1` rounds.
#[derive(Clone, Debug)]
pub struct PolicyState {
    histories: Vec<Dataset>,
    round: usize,
}

impl PolicyState {
    pub fn new(num_arms: usize) -> Self {
        Self { histories: vec![Dataset::empty(); num_arms], round: 1 }
    }

    pub fn histories(&self) -> &[Dataset] {
        &self.histories
    }

    pub fn pulls(&self, arm: usize) -> usize {
        self.histories[arm].len()
    }

    /// Current (not yet played) round, 1-based.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn record(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.histories[arm].push(reward)?;
        self.round += 1;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub arms: Vec<usize>,
    pub rewards: Vec<f64>,
    /// `sum_i gap_i * T_i(t)` after each round.
    pub pseudo_regret: Vec<f64>,
}

/// Plays `horizon` rounds. Rounds `1..=K` pull each arm once in index order;
/// afterwards the policy chooses. Reward noise and policy randomness come from
/// two keys drawn from `rng` and never share a stream.
pub fn run_trajectory(
    env: &Environment,
    policy: &dyn Policy,
    horizon: usize,
    rng: &mut Stream,
) -> Result<TrajectoryResult> {
    let num_arms = env.num_arms();
    if horizon < num_arms {
        return Err(invalid(format!("horizon {horizon} is shorter than the {num_arms} initial pulls")));
    }
    let noise_key = rng.next_u64();
    let policy_key = rng.next_u64();
    let mut noise = derive_stream(noise_key, &[]);

    let mut state = PolicyState::new(num_arms);
    let mut pulls = vec![0usize; num_arms];
    let mut result = TrajectoryResult {
        arms: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        pseudo_regret: Vec::with_capacity(horizon),
    };
    for round in 1..=horizon {
        let arm = if round <= num_arms {
            round - 1
        } else {
            let view = RoundView { round, histories: state.histories(), seed: policy_key };
            policy.choose(&view)
        };
        if arm >= num_arms {
            return Err(invalid(format!("policy {} chose arm {arm} of {num_arms}", policy.name())));
        }
        let reward = env.arms[arm].sample(&mut noise);
        state.record(arm, reward)?;
        pulls[arm] += 1;

        let regret: f64 = env.gaps.iter().zip(&pulls).map(|(g, &t)| g * t as f64).sum();
        debug_assert_eq!(pulls.iter().sum::<usize>(), round);
        debug_assert!(result.pseudo_regret.last().is_none_or(|&prev| prev <= regret));
        result.arms.push(arm);
        result.rewards.push(reward);
        result.pseudo_regret.push(regret);
    }
    Ok(result)
}
