//! Stochastic replay of the heralded transfer protocol.
//!
//! Each attempt draws one uniform number and classifies the photon as lost
//! before the spin, lost after it (an unheralded error) or detected. A trial
//! starts with a spin reset and runs sequences of up to `N_max` attempts,
//! resetting after each empty sequence, until the first click.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::rate::{AttemptProbabilities, MaxAttempts, ProtocolTiming};

pub const DEFAULT_ATTEMPT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttemptOutcome {
    Lost,
    Error,
    Detected,
}

impl AttemptOutcome {
    /// Partitions `[0, 1)` as `[lost | error | detected]`.
    pub fn classify(u: f64, probs: &AttemptProbabilities) -> Self {
        if u < probs.p_lost {
            AttemptOutcome::Lost
        } else if u < probs.p_lost + probs.p_e {
            AttemptOutcome::Error
        } else {
            AttemptOutcome::Detected
        }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R, probs: &AttemptProbabilities) -> Self {
        Self::classify(rng.random::<f64>(), probs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Seconds from the first reset to the click.
    pub elapsed: f64,
    /// Attempts over all sequences, including the detecting one.
    pub attempts_used: u64,
    pub sequences_used: u64,
    /// An unheralded error happened earlier in the sequence that clicked.
    pub error_occurred: bool,
}

impl TrialResult {
    fn from_counts(attempts_used: u64, sequences_used: u64, error_occurred: bool, timing: &ProtocolTiming) -> Self {
        let elapsed = sequences_used as f64 * timing.tau_reset + attempts_used as f64 * timing.slot();
        Self { elapsed, attempts_used, sequences_used, error_occurred }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateEstimator {
    /// `1 / mean(elapsed)`: the inverse mean time per success.
    #[default]
    Harmonic,
    /// `mean(1 / elapsed)`: the average of per-trial rates.
    MeanOfRates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub attempt_cap: u64,
    pub estimator: RateEstimator,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { trials: 100, seed: 0x5EED, attempt_cap: DEFAULT_ATTEMPT_CAP, estimator: RateEstimator::Harmonic }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("monte_carlo.trials", "need at least one trial"));
        }
        if self.attempt_cap == 0 {
            return Err(Error::param("monte_carlo.attempt_cap", "must be >= 1"));
        }
        Ok(())
    }

    /// Generator for trial `index`: the master seed picks the key, the trial
    /// index picks the stream, so trials are independent of scheduling.
    pub fn trial_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

pub fn simulate_trial<R: Rng + ?Sized>(
    probs: &AttemptProbabilities,
    n_max: MaxAttempts,
    timing: &ProtocolTiming,
    attempt_cap: u64,
    rng: &mut R,
) -> Result<TrialResult> {
    let sequence_len = n_max.get().unwrap_or(u64::MAX);
    if sequence_len == 0 {
        return Err(Error::param("n_max", "sequence length must be >= 1"));
    }
    let mut attempts = 0u64;
    let mut sequences = 1u64;
    let mut in_sequence = 0u64;
    let mut errored = false;
    loop {
        if attempts == attempt_cap {
            return Err(Error::NoDetection(attempt_cap));
        }
        if in_sequence == sequence_len {
            sequences += 1;
            in_sequence = 0;
            errored = false;
        }
        attempts += 1;
        in_sequence += 1;
        match AttemptOutcome::sample(rng, probs) {
            AttemptOutcome::Lost => {}
            AttemptOutcome::Error => errored = true,
            AttemptOutcome::Detected => {
                return Ok(TrialResult::from_counts(attempts, sequences, errored, timing));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean_rate: f64,
    pub std_error: f64,
    /// Fraction of trials whose click followed an unheralded error.
    pub error_fraction: f64,
    pub error_fraction_std_error: f64,
    pub mean_elapsed: f64,
    pub mean_attempts: f64,
    pub trials: u64,
}

/// Runs all trials (in parallel) and aggregates them in trial order.
pub fn run_trials(
    probs: &AttemptProbabilities,
    n_max: MaxAttempts,
    timing: &ProtocolTiming,
    cfg: &McConfig,
) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    timing.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| simulate_trial(probs, n_max, timing, cfg.attempt_cap, &mut cfg.trial_rng(i)))
        .collect()
}

pub fn simulate_rate(
    probs: &AttemptProbabilities,
    n_max: MaxAttempts,
    timing: &ProtocolTiming,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let trials = run_trials(probs, n_max, timing, cfg)?;
    Ok(summarize(&trials, cfg.estimator))
}

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    if let Some(&first) = values.first() {
        if values.iter().all(|&v| v == first) {
            return (first, 0.0);
        }
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn summarize(trials: &[TrialResult], estimator: RateEstimator) -> McEstimate {
    let elapsed: Vec<f64> = trials.iter().map(|t| t.elapsed).collect();
    let (mean_elapsed, se_elapsed) = mean_and_std_error(&elapsed);
    let (mean_rate, std_error) = match estimator {
        // Delta method: se(1/x̄) = se(x̄) / x̄².
        RateEstimator::Harmonic => (1.0 / mean_elapsed, se_elapsed / (mean_elapsed * mean_elapsed)),
        RateEstimator::MeanOfRates => {
            let rates: Vec<f64> = elapsed.iter().map(|e| 1.0 / e).collect();
            mean_and_std_error(&rates)
        }
    };
    let errors: Vec<f64> = trials.iter().map(|t| if t.error_occurred { 1.0 } else { 0.0 }).collect();
    let (error_fraction, _) = mean_and_std_error(&errors);
    let n = trials.len() as f64;
    let attempts: Vec<f64> = trials.iter().map(|t| t.attempts_used as f64).collect();
    McEstimate {
        mean_rate,
        std_error,
        error_fraction,
        error_fraction_std_error: (error_fraction * (1.0 - error_fraction) / n).sqrt(),
        mean_elapsed,
        mean_attempts: pairwise_sum(&attempts) / n,
        trials: trials.len() as u64,
    }
}
