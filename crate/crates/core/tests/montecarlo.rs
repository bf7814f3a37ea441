use spinlink::montecarlo::{run_trials, simulate_rate, summarize, AttemptOutcome, McConfig, RateEstimator};
use spinlink::rate::{error_probability_given_success, AttemptProbabilities, MaxAttempts, ProtocolTiming};
use spinlink::scenario::Scenario;

#[test]
fn attempt_frequencies_match_probabilities() {
    let probs = Scenario::reference_design().with_loss_db(10.0).probabilities().unwrap();
    let mut rng = McConfig::default().trial_rng(0);
    let n = 200_000u64;
    let mut counts = [0u64; 3];
    for _ in 0..n {
        counts[match AttemptOutcome::sample(&mut rng, &probs) {
            AttemptOutcome::Lost => 0,
            AttemptOutcome::Error => 1,
            AttemptOutcome::Detected => 2,
        }] += 1;
    }
    for (count, p) in counts.iter().zip([probs.p_lost, probs.p_e, probs.p_det]) {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let z = (*count as f64 - n as f64 * p) / sigma;
        assert!(z.abs() < 5.0, "p = {p}, count = {count}, z = {z}");
    }
}

#[test]
fn certain_detection_is_deterministic() {
    let probs = AttemptProbabilities::new(1.0, 0.0, 0.0).unwrap();
    let timing = ProtocolTiming::reference();
    let cfg = McConfig { trials: 50, ..McConfig::default() };
    let est = simulate_rate(&probs, MaxAttempts::Finite(10), &timing, &cfg).unwrap();
    assert_eq!(est.std_error, 0.0);
    assert!((est.mean_rate - 1.0 / (timing.tau_reset + timing.slot())).abs() < 1e-9 * est.mean_rate);
    assert_eq!(est.error_fraction, 0.0);
}

#[test]
fn identical_seeds_give_identical_results() {
    let s = Scenario::reference_design().with_loss_db(20.0);
    let r = s.rate().unwrap();
    let cfg = McConfig { trials: 500, seed: 42, ..McConfig::default() };
    let a = run_trials(&r.probs, r.n_max, &s.timing, &cfg).unwrap();
    let b = run_trials(&r.probs, r.n_max, &s.timing, &cfg).unwrap();
    assert_eq!(a, b);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = single.install(|| run_trials(&r.probs, r.n_max, &s.timing, &cfg).unwrap());
    assert_eq!(a, c);
    let other = run_trials(&r.probs, r.n_max, &s.timing, &McConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn elapsed_is_reconstructible_from_counts() {
    let s = Scenario::reference_design().with_loss_db(25.0);
    let r = s.rate().unwrap();
    let cfg = McConfig { trials: 200, ..McConfig::default() };
    for t in run_trials(&r.probs, r.n_max, &s.timing, &cfg).unwrap() {
        let expect = t.sequences_used as f64 * s.timing.tau_reset + t.attempts_used as f64 * s.timing.slot();
        assert_eq!(t.elapsed, expect);
        let n = r.n_max.get().unwrap();
        assert!(t.attempts_used > (t.sequences_used - 1) * n && t.attempts_used <= t.sequences_used * n);
    }
}

#[test]
fn agrees_with_analytic_rate_at_20_db() {
    let mut s = Scenario::reference_design().with_loss_db(20.0);
    s.rate.f_target = 0.99;
    let r = s.rate().unwrap();
    let cfg = McConfig { trials: 10_000, seed: 2020, ..McConfig::default() };
    let est = simulate_rate(&r.probs, r.n_max, &s.timing, &cfg).unwrap();
    let z = (est.mean_rate - r.rate) / est.std_error;
    assert!(z.abs() < 3.0, "mc {} ± {}, analytic {}", est.mean_rate, est.std_error, r.rate);
    let expected = error_probability_given_success(r.n_max.get().unwrap(), &r.probs).unwrap();
    let ze = (est.error_fraction - expected) / est.error_fraction_std_error;
    assert!(ze.abs() < 3.0, "error fraction {} vs {}", est.error_fraction, expected);
}

#[test]
fn mean_of_rates_estimator_is_available() {
    let s = Scenario::reference_design().with_loss_db(15.0);
    let r = s.rate().unwrap();
    let trials = run_trials(&r.probs, r.n_max, &s.timing, &McConfig { trials: 1000, ..McConfig::default() }).unwrap();
    let harmonic = summarize(&trials, RateEstimator::Harmonic);
    let mean = summarize(&trials, RateEstimator::MeanOfRates);
    // Jensen: the mean of 1/x is at least 1/mean(x).
    assert!(mean.mean_rate >= harmonic.mean_rate);
    assert_eq!(mean.error_fraction, harmonic.error_fraction);
}

#[test]
fn attempt_cap_is_reported() {
    let probs = AttemptProbabilities::new(1e-9, 1.0 - 1e-9, 0.0).unwrap();
    let cfg = McConfig { trials: 2, attempt_cap: 1000, ..McConfig::default() };
    let err = simulate_rate(&probs, MaxAttempts::Unbounded, &ProtocolTiming::reference(), &cfg).unwrap_err();
    assert!(matches!(err, spinlink::Error::NoDetection(1000)));
}
