//! Index policies: RMM-UCB, MARS and the concentration-bound baselines.
//!
//! All policies use the same round schedules. With `m_t = ceil(1 + t ln^2 t)`
//! (at least 2) the RMM bound is built at level `p_t = 1 / m_t` with `r = 1`,
//! and the baselines use `delta_t = p_t`. Median-of-means based indices split
//! an arm's history into `k_t = floor(min(17 ln t, sqrt(T_i)))` blocks (at
//! least 1).

use rand::Rng;

use crate::bandit::{Policy, RoundView};
use crate::error::{invalid, Result};
use crate::estimators::{empirical_mean, mom, truncated_mean, Dataset};
use crate::rmm::{build_context, rmm_ucb, ConfidenceSpec, ExtendedReal};
use crate::stream::Stream;

/// Alternative-sample count `max(2, ceil(1 + t ln^2 t))`.
pub fn schedule_m(t: usize) -> usize {
    let t = t.max(1) as f64;
    let ln = t.ln();
    ((1.0 + t * ln * ln).ceil() as usize).max(2)
}

/// Confidence parameter `p_t = 1 / m_t`.
pub fn schedule_delta(t: usize) -> f64 {
    1.0 / schedule_m(t) as f64
}

/// Block count `max(1, floor(min(17 ln t, sqrt(pulls))))`; never exceeds `pulls`.
pub fn schedule_k(t: usize, pulls: usize) -> usize {
    let cap = 17.0 * (t.max(1) as f64).ln();
    let k = cap.min((pulls as f64).sqrt()).floor() as usize;
    k.clamp(1, pulls.max(1))
}

/// RMM upper confidence bound of one arm at round `t` with `r = 1`,
/// `m = schedule_m(t)` and `k = schedule_k(t, |history|)`.
pub fn rmm_ucb_index(history: &Dataset, t: usize, rng: &mut Stream) -> ExtendedReal {
    rmm_index(history, t, schedule_k(t, history.len()), None, rng)
}

/// MARS: the RMM bound with a single block, i.e. a maximum of resampled means.
pub fn mars_index(history: &Dataset, t: usize, rng: &mut Stream) -> ExtendedReal {
    rmm_index(history, t, 1, None, rng)
}

fn rmm_index(history: &Dataset, t: usize, k: usize, m_cap: Option<usize>, rng: &mut Stream) -> ExtendedReal {
    assert!(!history.is_empty(), "index of an arm that was never pulled");
    let mut m = schedule_m(t);
    if let Some(cap) = m_cap {
        m = m.min(cap.max(2));
    }
    let conf = ConfidenceSpec::new(1, m).expect("m >= 2");
    let ctx = build_context(history.clone(), conf, k, rng).expect("schedules keep k <= n");
    rmm_ucb(&ctx).expect("r = 1 < m")
}

/// Arg-max of the indices; ties (including several `+inf`) are broken
/// uniformly at random.
pub fn select_arm<R: Rng + ?Sized>(indices: &[ExtendedReal], rng: &mut R) -> usize {
    assert!(!indices.is_empty(), "no arms to select from");
    let best = indices
        .iter()
        .copied()
        .max_by(ExtendedReal::total_cmp)
        .expect("nonempty");
    let tied: Vec<usize> = indices
        .iter()
        .enumerate()
        .filter(|(_, x)| x.total_cmp(&best).is_eq())
        .map(|(i, _)| i)
        .collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

/// Empirical mean plus `sqrt(2 ln(1/delta) / n)`.
pub fn vanilla_ucb_index(history: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let mean = empirical_mean(history)?;
    Ok(mean + (2.0 * (1.0 / delta).ln() / history.len() as f64).sqrt())
}

/// Moment bound `M` and order `a` handed to the oracle-parameterised baselines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineParams {
    moment_bound: f64,
    a: f64,
}

impl BaselineParams {
    pub fn new(moment_bound: f64, a: f64) -> Result<Self> {
        if !(moment_bound > 0.0 && moment_bound.is_finite()) {
            return Err(invalid(format!("moment bound M={moment_bound} must be positive")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("moment order a={a} must lie in (0, 1]")));
        }
        Ok(Self { moment_bound, a })
    }

    pub fn moment_bound(&self) -> f64 {
        self.moment_bound
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// `MoM(history, k) + (12 M)^(1/(1+a)) (1/floor(n/k))^(a/(1+a))`.
pub fn mom_ucb_index(history: &[f64], k: usize, params: &BaselineParams) -> Result<f64> {
    let center = mom(history, k)?;
    let block = (history.len() / k) as f64;
    let a = params.a;
    Ok(center + (12.0 * params.moment_bound).powf(1.0 / (1.0 + a)) * (1.0 / block).powf(a / (1.0 + a)))
}

/// Truncated mean plus `4 M^(1/(1+a)) (ln(1/delta) / n)^(a/(1+a))`.
pub fn truncated_ucb_index(history: &[f64], delta: f64, params: &BaselineParams) -> Result<f64> {
    check_delta(delta)?;
    let a = params.a;
    let center = truncated_mean(history, params.moment_bound, a, delta)?;
    let n = history.len() as f64;
    Ok(center + 4.0 * params.moment_bound.powf(1.0 / (1.0 + a)) * ((1.0 / delta).ln() / n).powf(a / (1.0 + a)))
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("delta={delta} must lie in (0, 1)")))
    }
}

fn choose_by_index<F>(view: &RoundView<'_>, mut index: F) -> usize
where
    F: FnMut(usize, &Dataset) -> ExtendedReal,
{
    let indices: Vec<ExtendedReal> = view.histories.iter().enumerate().map(|(arm, h)| index(arm, h)).collect();
    let mut ties = view.stream(view.num_arms() as u64);
    select_arm(&indices, &mut ties)
}

/// The RMM-UCB policy. Parameter-free: it sees only rewards and the round.
#[derive(Clone, Debug, Default)]
pub struct RmmUcb {
    m_cap: Option<usize>,
}

impl RmmUcb {
    pub fn new() -> Self {
        Self::default()
    }

    /// Caps the alternative-sample count. Voids exact coverage; off by default.
    pub fn with_m_cap(m_cap: Option<usize>) -> Self {
        Self { m_cap }
    }
}

impl Policy for RmmUcb {
    fn name(&self) -> &str {
        "rmm-ucb"
    }

    fn choose(&self, view: &RoundView<'_>) -> usize {
        choose_by_index(view, |arm, h| {
            let k = schedule_k(view.round, h.len());
            rmm_index(h, view.round, k, self.m_cap, &mut view.stream(arm as u64))
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Mars {
    m_cap: Option<usize>,
}

impl Mars {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_m_cap(m_cap: Option<usize>) -> Self {
        Self { m_cap }
    }
}

impl Policy for Mars {
    fn name(&self) -> &str {
        "mars"
    }

    fn choose(&self, view: &RoundView<'_>) -> usize {
        choose_by_index(view, |arm, h| rmm_index(h, view.round, 1, self.m_cap, &mut view.stream(arm as u64)))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VanillaUcb;

impl Policy for VanillaUcb {
    fn name(&self) -> &str {
        "vanilla-ucb"
    }

    fn choose(&self, view: &RoundView<'_>) -> usize {
        let delta = schedule_delta(view.round);
        choose_by_index(view, |_, h| ExtendedReal::from_f64(vanilla_ucb_index(h, delta).expect("valid delta")))
    }
}

/// Median-of-means UCB with per-arm oracle moment parameters.
#[derive(Clone, Debug)]
pub struct MomUcb {
    params: Vec<BaselineParams>,
}

impl MomUcb {
    pub fn new(params: Vec<BaselineParams>) -> Self {
        Self { params }
    }
}

impl Policy for MomUcb {
    fn name(&self) -> &str {
        "mom-ucb"
    }

    fn choose(&self, view: &RoundView<'_>) -> usize {
        choose_by_index(view, |arm, h| {
            let k = schedule_k(view.round, h.len());
            ExtendedReal::from_f64(mom_ucb_index(h, k, &self.params[arm]).expect("valid parameters"))
        })
    }
}

/// Truncated-mean UCB with per-arm oracle moment parameters.
#[derive(Clone, Debug)]
pub struct TruncatedUcb {
    params: Vec<BaselineParams>,
}

impl TruncatedUcb {
    pub fn new(params: Vec<BaselineParams>) -> Self {
        Self { params }
    }
}

impl Policy for TruncatedUcb {
    fn name(&self) -> &str {
        "trunc-ucb"
    }

    fn choose(&self, view: &RoundView<'_>) -> usize {
        let delta = schedule_delta(view.round);
        choose_by_index(view, |arm, h| {
            ExtendedReal::from_f64(truncated_ucb_index(h, delta, &self.params[arm]).expect("valid parameters"))
        })
    }
}

/// Reference policy that always plays a fixed arm (the best one, when built
/// by the harness).
#[derive(Clone, Copy, Debug)]
pub struct FixedArm {
    arm: usize,
}

impl FixedArm {
    pub fn new(arm: usize) -> Self {
        Self { arm }
    }
}

impl Policy for FixedArm {
    fn name(&self) -> &str {
        "best-arm"
    }

    fn choose(&self, _: &RoundView<'_>) -> usize {
        self.arm
    }
}
