use rand::Rng;
use rand_distr::{Distribution, Pareto};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::{beta::beta, gamma::gamma};

use rmm_bandit::bandit::{central_moment_constant, pareto_mean, sample_reward, true_mean, ArmSpec, PARETO_BASE_SHAPE};
use rmm_bandit::{derive_stream, Error};

fn draws(arm: &ArmSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = derive_stream(seed, &[]);
    (0..n).map(|_| sample_reward(arm, &mut rng)).collect()
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn pareto_rewards_are_symmetric_about_the_mean() {
    let arm = ArmSpec::pareto(1.0, 0.1).unwrap();
    let n = 100_000;
    let above: Vec<f64> = draws(&arm, n, 11).into_iter().map(|r| r - 1.0).collect();
    let below: Vec<f64> = draws(&arm, n, 12).into_iter().map(|r| 1.0 - r).collect();
    let d = ks_statistic(above, below);
    // asymptotic two-sample critical value at the 0.1% level
    let critical = (-(0.001f64 / 2.0).ln() / 2.0).sqrt() * (2.0 / n as f64).sqrt();
    assert!(d < critical, "KS statistic {d} exceeds {critical}");
}

#[test]
fn pareto_median_is_the_mean() {
    let mut v = draws(&ArmSpec::pareto(1.0, 0.1).unwrap(), 100_000, 13);
    let mid = v.len() / 2;
    let median = *v.select_nth_unstable_by(mid, f64::total_cmp).1;
    assert!((median - 1.0).abs() <= 0.02, "median {median}");
}

#[test]
fn gaussian_sample_mean_converges() {
    let (mu, sigma) = (0.5, 2.0);
    let n = 100_000;
    let v = draws(&ArmSpec::gaussian(mu, sigma).unwrap(), n, 14);
    let mean = v.iter().sum::<f64>() / n as f64;
    assert!((mean - mu).abs() <= 4.0 * sigma / (n as f64).sqrt(), "mean {mean}");
}

#[test]
fn pareto_sign_is_fair() {
    let n = 100_000;
    let positive = draws(&ArmSpec::pareto(0.0, 0.3).unwrap(), n, 15).iter().filter(|&&r| r > 0.0).count();
    let expected = n as f64 / 2.0;
    let stat = 2.0 * (positive as f64 - expected).powi(2) / expected;
    assert!(stat < ChiSquared::new(1.0).unwrap().inverse_cdf(0.999), "{positive} positive of {n}");
}

#[test]
fn true_means_and_raw_pareto_mean() {
    assert_eq!(true_mean(&ArmSpec::pareto(1.0, 0.1).unwrap()), 1.0);
    assert_eq!(true_mean(&ArmSpec::gaussian(0.5, 1.0).unwrap()), 0.5);
    let shape = 1.15;
    assert!((pareto_mean(shape) - 7.666_666_666_666_667).abs() < 1e-12);
    // sample mean of a raw Pareto with a finite variance as an independent check
    let shape = 4.0;
    let dist = Pareto::new(1.0, shape).unwrap();
    let mut rng = derive_stream(16, &[]);
    let n = 1_000_000;
    let mean = (0..n).map(|_| dist.sample(&mut rng)).sum::<f64>() / n as f64;
    let sd = (shape / ((shape - 1.0).powi(2) * (shape - 2.0))).sqrt();
    assert!((mean - pareto_mean(shape)).abs() < 4.0 * sd / (n as f64).sqrt(), "{mean}");
}

#[test]
fn centered_pareto_moment_matches_beta_closed_form() {
    // E|X - 1|^p = alpha * B(p + 1, alpha - p) for X ~ Pareto(1, alpha)
    for (eps, a) in [(0.1, 0.1), (0.1, 0.05), (0.5, 0.5), (0.5, 0.1), (1.0, 0.9), (2.0, 1.0)] {
        let alpha = PARETO_BASE_SHAPE + eps;
        let p = 1.0 + a;
        let expected = alpha * beta(p + 1.0, alpha - p);
        let got = central_moment_constant(&ArmSpec::pareto(0.0, eps).unwrap(), a).unwrap();
        assert!((got - expected).abs() <= 1e-8 * expected, "eps={eps} a={a}: {got} vs {expected}");
    }
}

/// Importance-sampled `E|mu + S (X - 1)|^p`: draws `X` from the heavier
/// `Pareto(1, alpha - p)`, which makes the weighted integrand bounded.
fn moment_by_importance_sampling(mu: f64, alpha: f64, p: f64, n: usize, seed: u64) -> (f64, f64) {
    let proposal = alpha - p;
    let mut rng = derive_stream(seed, &[]);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let u: f64 = 1.0 - rng.random::<f64>();
        let x = u.powf(-1.0 / proposal);
        let weight = alpha / proposal * x.powf(-p);
        let g = 0.5 * ((mu + x - 1.0).abs().powf(p) + (mu - x + 1.0).abs().powf(p));
        let y = g * weight;
        sum += y;
        sum_sq += y * y;
    }
    let mean = sum / n as f64;
    let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
    (mean, se)
}

#[test]
fn shifted_pareto_moment_matches_monte_carlo() {
    for (mu, eps, a) in [(0.0, 0.1, 0.1), (1.0, 0.1, 0.1), (0.9, 0.1, 0.1), (0.5, 0.5, 0.5), (-2.0, 0.3, 0.2)] {
        let alpha = PARETO_BASE_SHAPE + eps;
        let (mc, se) = moment_by_importance_sampling(mu, alpha, 1.0 + a, 10_000_000, 17);
        let got = central_moment_constant(&ArmSpec::pareto(mu, eps).unwrap(), a).unwrap();
        assert!((got - mc).abs() <= 0.01 * mc, "mu={mu} eps={eps} a={a}: quadrature {got}, MC {mc}");
        assert!((got - mc).abs() <= 5.0 * se, "mu={mu} eps={eps} a={a}: quadrature {got}, MC {mc} +- {se}");
    }
}

#[test]
fn gaussian_moments_match_closed_forms() {
    for (mu, sigma) in [(0.0, 1.0), (0.5, 1.0), (-1.0, 0.3), (3.0, 2.0)] {
        let got = central_moment_constant(&ArmSpec::gaussian(mu, sigma).unwrap(), 1.0).unwrap();
        let expected = mu * mu + sigma * sigma;
        assert!((got - expected).abs() <= 1e-8 * expected, "{got} vs {expected}");
    }
    // E|sigma Z|^p = sigma^p 2^(p/2) Gamma((p+1)/2) / sqrt(pi)
    for (sigma, a) in [(1.0f64, 0.5), (2.0, 0.1), (0.7, 0.9)] {
        let p = 1.0 + a;
        let expected = sigma.powf(p) * 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt();
        let got = central_moment_constant(&ArmSpec::gaussian(0.0, sigma).unwrap(), a).unwrap();
        assert!((got - expected).abs() <= 1e-8 * expected, "{got} vs {expected}");
    }
}

#[test]
fn moment_of_too_high_order_is_rejected() {
    let arm = ArmSpec::pareto(0.0, 0.1).unwrap();
    let a = arm.pareto_shape().unwrap() - 1.0;
    assert!(matches!(central_moment_constant(&arm, a), Err(Error::MomentDoesNotExist { .. })));
    assert!(central_moment_constant(&arm, 0.0).is_err());
}
