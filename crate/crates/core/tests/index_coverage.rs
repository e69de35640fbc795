use rmm_bandit::bandit::ArmSpec;
use rmm_bandit::policies::{mars_index, rmm_ucb_index, schedule_m};
use rmm_bandit::{derive_stream, Dataset, ExtendedReal};

/// Frequency with which the index falls below the arm mean, against the
/// per-round level `1 / m_t`.
fn false_ucb_rate(index: fn(&Dataset, usize, &mut rmm_bandit::Stream) -> ExtendedReal, pulls: usize, t: usize) {
    let trials = 100_000;
    let arm = ArmSpec::pareto(1.0, 0.1).unwrap();
    let mut rng = derive_stream(404, &[pulls as u64, t as u64]);
    let mut below = 0;
    for _ in 0..trials {
        let history = Dataset::new((0..pulls).map(|_| arm.sample(&mut rng)).collect()).unwrap();
        if index(&history, t, &mut rng) < ExtendedReal::Finite(1.0) {
            below += 1;
        }
    }
    let p = 1.0 / schedule_m(t) as f64;
    let freq = below as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((freq - p).abs() <= 4.0 * se, "pulls={pulls} t={t}: {freq} vs {p}");
}

#[test]
fn rmm_index_misses_the_mean_at_the_scheduled_rate() {
    assert_eq!(schedule_m(10), 55);
    false_ucb_rate(rmm_ucb_index, 9, 10);
    false_ucb_rate(rmm_ucb_index, 4, 3);
}

#[test]
fn mars_index_misses_the_mean_at_the_scheduled_rate() {
    false_ucb_rate(mars_index, 9, 10);
}
