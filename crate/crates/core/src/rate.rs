//! Analytic rate-fidelity model of the heralded transfer protocol.
//!
//! After each spin reset up to `N` photons are sent. Every attempt ends in one
//! of three ways: the photon is lost before touching the spin (`p_lost`), it
//! touches the spin and is then lost without a click (`p_e`, an unheralded
//! error), or it is detected (`p_det`). A click ends the sequence; `N` misses
//! in a row force another reset. `N_max` is the longest sequence that still
//! meets a fidelity target.

use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::device::{PdrParams, PolarizerParams};
use crate::error::{check_positive, check_probability, Error, Result};
use crate::fidelity::transfer_fidelity;
use crate::numeric::GeometricBlock;

const PARTITION_TOL: f64 = 1e-12;

/// Search cap for `N_max`.
pub const MAX_ATTEMPTS_CAP: u64 = 1_000_000_000;

/// Link and detection-side parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Link transmissivity η_link.
    pub eta_link: f64,
    /// Detection-path efficiency (PBS, HWP and detector).
    pub eta_det: f64,
    /// Probability ξ that an H photon reaches the cavity.
    pub xi: f64,
    /// R_cav,V: spin-averaged V-mode cavity reflectivity.
    pub r_cav_v_avg: f64,
    /// R_cav,H: H-mode cavity reflectivity.
    pub r_cav_h: f64,
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        check_probability("link.eta_link", self.eta_link)?;
        check_probability("link.eta_det", self.eta_det)?;
        check_probability("link.xi", self.xi)?;
        check_probability("link.r_cav_v", self.r_cav_v_avg)?;
        check_probability("link.r_cav_h", self.r_cav_h)?;
        if self.xi > 1.0 - self.r_cav_h + PARTITION_TOL {
            return Err(Error::param(
                "link.xi",
                format!("xi = {} exceeds 1 - r_cav_h = {}", self.xi, 1.0 - self.r_cav_h),
            ));
        }
        Ok(())
    }
}

/// Spin reset and per-attempt timing, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolTiming {
    pub tau_reset: f64,
    pub tau_pulse: f64,
    /// Slots per pulse; dynamical decoupling may stretch each attempt.
    pub pulse_multiplier: f64,
}

impl ProtocolTiming {
    /// 30 µs reset, 5.81 MHz clock, one pulse per slot.
    pub fn reference() -> Self {
        Self { tau_reset: 30e-6, tau_pulse: 1.0 / 5.81e6, pulse_multiplier: 1.0 }
    }

    /// Duration of one attempt.
    pub fn slot(&self) -> f64 {
        self.pulse_multiplier * self.tau_pulse
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("timing.tau_reset", self.tau_reset)?;
        check_positive("timing.tau_pulse", self.tau_pulse)?;
        check_positive("timing.pulse_multiplier", self.pulse_multiplier)
    }
}

impl Default for ProtocolTiming {
    fn default() -> Self {
        Self::reference()
    }
}

/// Outcome partition of a single attempt. Sums to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptProbabilities {
    pub p_det: f64,
    pub p_lost: f64,
    pub p_e: f64,
}

impl AttemptProbabilities {
    pub fn new(p_det: f64, p_lost: f64, p_e: f64) -> Result<Self> {
        for (what, p) in [("p_det", p_det), ("p_lost", p_lost), ("p_e", p_e)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InconsistentProbabilities(format!("{what} = {p} is outside [0, 1]")));
            }
        }
        let sum = p_det + p_lost + p_e;
        if (sum - 1.0).abs() > PARTITION_TOL {
            return Err(Error::InconsistentProbabilities(format!("p_det + p_lost + p_e = {sum}")));
        }
        Ok(Self { p_det, p_lost, p_e })
    }

    /// Closes the partition with `p_e = 1 - p_det - p_lost`.
    pub fn from_det_lost(p_det: f64, p_lost: f64) -> Result<Self> {
        let mut p_e = 1.0 - p_det - p_lost;
        if (-PARTITION_TOL..0.0).contains(&p_e) {
            p_e = 0.0;
        }
        Self::new(p_det, p_lost, p_e)
    }
}

fn detection_numerator(pdr: &PdrParams, polarizer: &PolarizerParams, link: &LinkParams) -> f64 {
    let (t_v, r_v, t_h, r_h) = (pdr.transmission_v(), pdr.reflection_v(), pdr.transmission_h(), pdr.reflection_h());
    let (eta_v, eta_h) = (polarizer.eta_pol_v, polarizer.eta_pol_h);
    t_v * t_v * eta_v * eta_v * link.r_cav_v_avg + r_v + t_h * t_h * eta_h * eta_h * link.r_cav_h + r_h
}

/// Per-attempt probabilities averaged over both input polarizations.
pub fn attempt_probabilities(
    pdr: &PdrParams,
    polarizer: &PolarizerParams,
    link: &LinkParams,
) -> Result<AttemptProbabilities> {
    pdr.validate()?;
    polarizer.validate()?;
    link.validate()?;
    let eta = link.eta_link;
    let p_det = eta / 2.0 * detection_numerator(pdr, polarizer, link) * link.eta_det;

    let (t_v, t_h) = (pdr.transmission_v(), pdr.transmission_h());
    let (eta_v, eta_h) = (polarizer.eta_pol_v, polarizer.eta_pol_h);
    let p_lost = 1.0 - eta
        + eta / 2.0
            * (pdr.scattering_v()
                + pdr.scattering_h()
                + t_v * (1.0 - eta_v)
                + t_h * (1.0 - eta_h)
                + t_h * eta_h * (1.0 - link.r_cav_h - link.xi));
    AttemptProbabilities::from_det_lost(p_det, p_lost)
}

/// The longer, itemized unheralded-error expression: V light lost after the
/// cavity plus H light leaking into it. Used only as a cross-check on the
/// canonical `1 - p_det - p_lost`.
pub fn explicit_error_probability(pdr: &PdrParams, polarizer: &PolarizerParams, link: &LinkParams) -> f64 {
    let (t_v, t_h) = (pdr.transmission_v(), pdr.transmission_h());
    let (eta_v, eta_h) = (polarizer.eta_pol_v, polarizer.eta_pol_h);
    let r_cav = link.r_cav_v_avg;
    link.eta_link / 2.0
        * (t_v * eta_v * (1.0 - r_cav + r_cav * (1.0 - eta_v) + r_cav * eta_v * pdr.scattering_v())
            + t_h * eta_h * link.xi)
}

/// Canonical vs itemized `p_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionDiagnostic {
    pub canonical_p_e: f64,
    pub explicit_p_e: f64,
    /// `canonical - explicit`.
    pub gap: f64,
}

pub fn partition_diagnostic(
    pdr: &PdrParams,
    polarizer: &PolarizerParams,
    link: &LinkParams,
) -> Result<PartitionDiagnostic> {
    let probs = attempt_probabilities(pdr, polarizer, link)?;
    let explicit_p_e = explicit_error_probability(pdr, polarizer, link);
    Ok(PartitionDiagnostic { canonical_p_e: probs.p_e, explicit_p_e, gap: probs.p_e - explicit_p_e })
}

/// Single-polarization attempt model: one PDR transmission `eta_pdr`, one
/// polarizer efficiency and one cavity reflectivity. Returns `(p_det, p_e)`.
pub fn single_polarization_probabilities(
    eta_link: f64,
    eta_pdr: f64,
    eta_pol: f64,
    r_cav: f64,
    eta_det: f64,
) -> (f64, f64) {
    let p_det = eta_link * eta_pdr * eta_pdr * eta_pol * eta_pol * r_cav * eta_det;
    let p_e = eta_link * eta_pdr * eta_pol * (r_cav * (1.0 - eta_pol + eta_pol * (1.0 - eta_pdr)) + 1.0 - r_cav);
    (p_det, p_e)
}

/// Probability that a click on attempt `m` was preceded by at least one
/// unheralded error in the same sequence.
pub fn error_probability_given_click(m: u64, probs: &AttemptProbabilities) -> Result<f64> {
    if m == 0 {
        return Err(Error::param("m", "attempt index starts at 1"));
    }
    if m == 1 {
        return Ok(0.0);
    }
    if probs.p_det >= 1.0 {
        return Err(Error::param("p_det", "a click is certain on the first attempt; m > 1 is impossible"));
    }
    // p_lost / (1 - p_det) = 1 - p_e / (p_lost + p_e)
    let clean = (-(probs.p_e / (probs.p_lost + probs.p_e))).ln_1p();
    Ok(-((m - 1) as f64 * clean).exp_m1())
}

/// `1 - (1 - p)^n` without cancellation.
fn at_least_once(p: f64, n: u64) -> f64 {
    -((n as f64) * (-p).ln_1p()).exp_m1()
}

/// `P_success = 1 - (1 - p_det)^n`.
pub fn success_probability(n: u64, probs: &AttemptProbabilities) -> f64 {
    at_least_once(probs.p_det, n)
}

/// Probability that a sequence of `n` attempts ends in a click preceded by an
/// unheralded error: `1 - (1 - p_det)^n - p_det (1 - p_lost^n) / (1 - p_lost)`.
///
/// Evaluated as `p_det Σ_{k<n} ((1 - p_det)^k - p_lost^k)`, whose terms are
/// all non-negative; the two-term form above cancels when `p_e n` is small.
pub fn sequence_error_probability(n: u64, probs: &AttemptProbabilities) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "sequence length must be >= 1"));
    }
    if n == 1 || probs.p_e == 0.0 {
        return Ok(0.0);
    }
    let sums = GeometricBlock::new(1.0 - probs.p_det, probs.p_lost, probs.p_e, n);
    Ok((probs.p_det * sums.sum_diff).clamp(0.0, 1.0))
}

/// `P(error | click)` for a sequence of `n` attempts: the per-click error
/// probability weighted by the distribution of the click position.
pub fn error_probability_given_success(n: u64, probs: &AttemptProbabilities) -> Result<f64> {
    let p_success = success_probability(n, probs);
    if p_success == 0.0 {
        return Err(Error::ZeroDetection);
    }
    Ok((sequence_error_probability(n, probs)? / p_success).clamp(0.0, 1.0))
}

/// Fidelity after mixing the single-attempt state with the fully mixed state
/// (overlap 1/2) with weight `P_error(n)`.
pub fn protocol_fidelity(n: u64, probs: &AttemptProbabilities, f0: f64) -> Result<f64> {
    let p_error = sequence_error_probability(n, probs)?;
    Ok((1.0 - p_error) * f0 + p_error * 0.5)
}

/// Longest admissible sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxAttempts {
    Finite(u64),
    /// The search hit [`MAX_ATTEMPTS_CAP`] while still feasible.
    Capped(u64),
    /// `p_e = 0`: no sequence length ever degrades the fidelity.
    Unbounded,
}

impl MaxAttempts {
    /// Sequence length to use; `None` when unbounded.
    pub fn get(self) -> Option<u64> {
        match self {
            MaxAttempts::Finite(n) | MaxAttempts::Capped(n) => Some(n),
            MaxAttempts::Unbounded => None,
        }
    }

    pub fn is_capped(self) -> bool {
        matches!(self, MaxAttempts::Capped(_))
    }

    /// `f64::INFINITY` when unbounded.
    pub fn as_f64(self) -> f64 {
        self.get().map_or(f64::INFINITY, |n| n as f64)
    }
}

/// Largest `N >= 1` with `protocol_fidelity(N) >= f_target`.
///
/// The fidelity is non-increasing in `N`, so an exponential bracket followed
/// by bisection finds the boundary in `O(log N)` evaluations.
pub fn max_attempts(probs: &AttemptProbabilities, f0: f64, f_target: f64) -> Result<MaxAttempts> {
    check_probability("f0", f0)?;
    check_probability("f_target", f_target)?;
    if f_target > f0 {
        return Err(Error::InfeasibleConstraint { target: f_target, f0 });
    }
    if probs.p_e == 0.0 {
        return Ok(MaxAttempts::Unbounded);
    }
    let feasible = |n: u64| protocol_fidelity(n, probs, f0).map(|f| f >= f_target);

    let mut good = 1u64;
    let mut bad = loop {
        let next = (good * 2).min(MAX_ATTEMPTS_CAP);
        if !feasible(next)? {
            break next;
        }
        if next == MAX_ATTEMPTS_CAP {
            return Ok(MaxAttempts::Capped(MAX_ATTEMPTS_CAP));
        }
        good = next;
    };
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if feasible(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(MaxAttempts::Finite(good))
}

/// Mean time spent in failed sequences before the successful one.
pub fn expected_failure_time(n: u64, probs: &AttemptProbabilities, timing: &ProtocolTiming) -> Result<f64> {
    let p_success = success_probability(n, probs);
    if p_success == 0.0 {
        return Err(Error::ZeroDetection);
    }
    let miss_all = 1.0 - p_success;
    Ok(miss_all / p_success * (n as f64 * timing.slot() + timing.tau_reset))
}

/// `τ_reset + τ_slot Σ_m m (1 - p_det)^(m-1) p_det`, summed over `m <= n`
/// without conditioning on a click.
pub fn expected_success_time(n: u64, probs: &AttemptProbabilities, timing: &ProtocolTiming) -> f64 {
    timing.tau_reset + timing.slot() * click_time_moment(n, probs.p_det)
}

/// Mean duration of the successful sequence: the click position is averaged
/// over sequences that do produce a click.
pub fn expected_success_time_conditional(n: u64, probs: &AttemptProbabilities, timing: &ProtocolTiming) -> Result<f64> {
    let p_success = success_probability(n, probs);
    if p_success == 0.0 {
        return Err(Error::ZeroDetection);
    }
    Ok(timing.tau_reset + timing.slot() * click_time_moment(n, probs.p_det) / p_success)
}

/// `Σ_{m=1}^{n} m (1-p)^(m-1) p`, equal to `P_success / p - n (1-p)^n`.
fn click_time_moment(n: u64, p_det: f64) -> f64 {
    if p_det == 0.0 {
        return 0.0;
    }
    p_det * GeometricBlock::new(1.0 - p_det, 0.0, 1.0 - p_det, n).moment_a
}

/// How the successful sequence's duration enters the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessTimeModel {
    /// Click position averaged over sequences that click; equals the true
    /// mean time per success.
    #[default]
    Conditional,
    /// Unconditioned click-time sum, as in [`expected_success_time`].
    Verbatim,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateOptions {
    pub f_target: f64,
    pub success_time: SuccessTimeModel,
    /// Mix V photons that reflect straight off the PDR (and so never touch the
    /// spin) into the single-attempt state as uncorrected heralds.
    pub false_herald_correction: bool,
    /// Regime 1 holds while `N_max <= n_low`.
    pub n_low: u64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self { f_target: 0.95, success_time: SuccessTimeModel::Conditional, false_herald_correction: false, n_low: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Regime {
    /// Few attempts per reset; the fidelity constraint dominates.
    Fidelity = 1,
    /// Reset time dominates the time per success.
    Reset = 2,
    /// Attempt time exceeds the reset time; link loss dominates.
    Channel = 3,
}

impl Regime {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl From<Regime> for u8 {
    fn from(r: Regime) -> u8 {
        r.number()
    }
}

impl TryFrom<u8> for Regime {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Regime::Fidelity),
            2 => Ok(Regime::Reset),
            3 => Ok(Regime::Channel),
            _ => Err(format!("no regime {v}")),
        }
    }
}

pub fn classify_regime(n_max: MaxAttempts, timing: &ProtocolTiming, n_low: u64) -> Regime {
    let n = n_max.as_f64();
    if n * timing.slot() > timing.tau_reset {
        Regime::Channel
    } else if n <= n_low as f64 {
        Regime::Fidelity
    } else {
        Regime::Reset
    }
}

/// Direct-transmission (PLOB) capacity per mode, `-log2(1 - η)`, per slot.
pub fn repeaterless_bound(eta_link: f64, timing: &ProtocolTiming) -> f64 {
    -(-eta_link).ln_1p() / std::f64::consts::LN_2 / timing.slot()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub n_max: MaxAttempts,
    /// Single-attempt fidelity the constraint was solved against.
    pub f0: f64,
    pub probs: AttemptProbabilities,
    pub p_error: f64,
    pub p_success: f64,
    pub t_failures: f64,
    pub t_success: f64,
    /// Transfers per second, `1 / (t_failures + t_success)`.
    pub rate: f64,
    pub regime: Regime,
}

/// Weight of false heralds among clicks: V light reflected straight off the PDR.
pub fn false_herald_weight(pdr: &PdrParams, polarizer: &PolarizerParams, link: &LinkParams) -> f64 {
    let numerator = detection_numerator(pdr, polarizer, link);
    if numerator == 0.0 {
        0.0
    } else {
        pdr.reflection_v() / numerator
    }
}

/// Rate and timing for a device/link given single-attempt fidelity `f0`.
pub fn rate_from_probabilities(
    probs: &AttemptProbabilities,
    f0: f64,
    timing: &ProtocolTiming,
    options: &RateOptions,
) -> Result<RateResult> {
    timing.validate()?;
    if probs.p_det == 0.0 {
        return Err(Error::ZeroDetection);
    }
    let n_max = max_attempts(probs, f0, options.f_target)?;
    let (p_error, p_success, t_failures, t_success) = match n_max.get() {
        Some(n) => {
            let t_success = match options.success_time {
                SuccessTimeModel::Conditional => expected_success_time_conditional(n, probs, timing)?,
                SuccessTimeModel::Verbatim => expected_success_time(n, probs, timing),
            };
            (
                sequence_error_probability(n, probs)?,
                success_probability(n, probs),
                expected_failure_time(n, probs, timing)?,
                t_success,
            )
        }
        // p_e = 0 and no reset ever needed beyond the first one.
        None => (0.0, 1.0, 0.0, timing.tau_reset + timing.slot() / probs.p_det),
    };
    Ok(RateResult {
        n_max,
        f0,
        probs: *probs,
        p_error,
        p_success,
        t_failures,
        t_success,
        rate: 1.0 / (t_failures + t_success),
        regime: classify_regime(n_max, timing, options.n_low),
    })
}

pub fn transfer_rate(
    pdr: &PdrParams,
    polarizer: &PolarizerParams,
    cavity: &CavityParams,
    link: &LinkParams,
    timing: &ProtocolTiming,
    options: &RateOptions,
) -> Result<RateResult> {
    let mut f0 = transfer_fidelity(pdr, polarizer, cavity)?.f_avg;
    if options.false_herald_correction {
        let w = false_herald_weight(pdr, polarizer, link);
        f0 = (1.0 - w) * f0 + w * 0.5;
    }
    let probs = attempt_probabilities(pdr, polarizer, link)?;
    rate_from_probabilities(&probs, f0, timing, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::ReflectionPhase;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn presets(eta_link: f64) -> (PdrParams, PolarizerParams, LinkParams) {
        (
            PdrParams::from_powers(0.99, 0.01, 0.85, 0.15, ReflectionPhase::Negative).unwrap(),
            PolarizerParams { eta_pol_v: 0.989, eta_pol_h: 0.128 },
            LinkParams { eta_link, eta_det: 0.936, xi: 1.0 - 0.921, r_cav_v_avg: 0.356, r_cav_h: 0.921 },
        )
    }

    fn probs(p_det: f64, p_lost: f64, p_e: f64) -> AttemptProbabilities {
        AttemptProbabilities::new(p_det, p_lost, p_e).unwrap()
    }

    #[test]
    fn dark_link_loses_everything() {
        let (pdr, pol, link) = presets(0.0);
        let p = attempt_probabilities(&pdr, &pol, &link).unwrap();
        assert_eq!((p.p_det, p.p_lost, p.p_e), (0.0, 1.0, 0.0));
    }

    #[test]
    fn lossless_device_always_clicks() {
        let pdr = PdrParams::from_powers(1.0, 0.0, 0.0, 1.0, ReflectionPhase::Negative).unwrap();
        let link = LinkParams { eta_link: 1.0, eta_det: 1.0, xi: 0.0, r_cav_v_avg: 1.0, r_cav_h: 1.0 };
        let p = attempt_probabilities(&pdr, &PolarizerParams::transparent(), &link).unwrap();
        assert_abs_diff_eq!(p.p_det, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_lost, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_e, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn preset_probabilities_match_spreadsheet() {
        let (pdr, pol, link) = presets(1e-3);
        let p = attempt_probabilities(&pdr, &pol, &link).unwrap();
        assert_relative_eq!(p.p_det, 0.00023970209226331678, max_relative = 1e-9);
        assert_relative_eq!(p.p_lost, 0.999376045, max_relative = 1e-12);
        assert_relative_eq!(p.p_e, 0.00038425290773669296, max_relative = 1e-9);
        let diag = partition_diagnostic(&pdr, &pol, &link).unwrap();
        assert_relative_eq!(diag.explicit_p_e, 0.00032148811738000007, max_relative = 1e-9);
        assert!(diag.gap > 0.0);
    }

    #[test]
    fn rejects_out_of_range_link() {
        let (pdr, pol, mut link) = presets(1.5);
        assert!(matches!(
            attempt_probabilities(&pdr, &pol, &link),
            Err(Error::InvalidParameter { name: "link.eta_link", .. })
        ));
        link.eta_link = 0.5;
        link.xi = 0.5;
        assert!(link.validate().is_err());
    }

    #[test]
    fn single_polarization_limit_matches_two_polarization_average() {
        // Equal parameters for both polarizations, R = 0.
        let (eta_link, eta_pdr, eta_pol, r_cav, eta_det) = (0.3, 0.9, 0.95, 0.6, 0.9);
        let pdr = PdrParams::from_powers(eta_pdr, 0.0, eta_pdr, 0.0, ReflectionPhase::Negative).unwrap();
        let pol = PolarizerParams { eta_pol_v: eta_pol, eta_pol_h: eta_pol };
        let v_error = 1.0 - r_cav + r_cav * (1.0 - eta_pol) + r_cav * eta_pol * (1.0 - eta_pdr);
        let link = LinkParams { eta_link, eta_det, xi: v_error, r_cav_v_avg: r_cav, r_cav_h: r_cav };
        let (p_det, p_e) = single_polarization_probabilities(eta_link, eta_pdr, eta_pol, r_cav, eta_det);
        let two = attempt_probabilities(&pdr, &pol, &LinkParams { xi: 0.0, ..link }).unwrap();
        assert_relative_eq!(two.p_det, p_det, max_relative = 1e-12);
        assert_relative_eq!(explicit_error_probability(&pdr, &pol, &link), p_e, max_relative = 1e-12);
    }

    #[test]
    fn error_given_click_examples() {
        let p = probs(0.1, 0.8, 0.1);
        assert_eq!(error_probability_given_click(1, &p).unwrap(), 0.0);
        assert_relative_eq!(error_probability_given_click(3, &p).unwrap(), 17.0 / 81.0, max_relative = 1e-14);
        assert_eq!(error_probability_given_click(7, &probs(0.1, 0.9, 0.0)).unwrap(), 0.0);
        assert!(error_probability_given_click(0, &p).is_err());
    }

    #[test]
    fn sequence_error_examples() {
        let p = probs(0.1, 0.8, 0.1);
        assert_eq!(sequence_error_probability(1, &p).unwrap(), 0.0);
        // Exact rational term-by-term sum: 0.07335.
        assert_relative_eq!(sequence_error_probability(5, &p).unwrap(), 0.07335, max_relative = 1e-12);
        for n in [1, 2, 10, 1000] {
            assert_eq!(sequence_error_probability(n, &probs(0.2, 0.8, 0.0)).unwrap(), 0.0);
        }
        assert_eq!(sequence_error_probability(50, &probs(0.0, 1.0, 0.0)).unwrap(), 0.0);
        assert!(sequence_error_probability(0, &p).is_err());
    }

    #[test]
    fn protocol_fidelity_examples() {
        let p = probs(0.01, 0.97, 0.02);
        assert_eq!(protocol_fidelity(1, &p, 0.9999).unwrap(), 0.9999);
        // Exact rational evaluation: P_error = 0.13434905797826588, F = 0.9327389059166649.
        assert_relative_eq!(protocol_fidelity(50, &p, 0.9999).unwrap(), 0.9327389059166649, max_relative = 1e-12);
        let long = protocol_fidelity(1_000_000, &probs(0.01, 0.0, 0.99), 0.9999).unwrap();
        assert_abs_diff_eq!(long, 0.5, epsilon = 0.01);
    }

    #[test]
    fn max_attempts_edges() {
        let p = probs(0.01, 0.97, 0.02);
        assert_eq!(max_attempts(&p, 0.99, 0.99).unwrap(), MaxAttempts::Finite(1));
        assert_eq!(max_attempts(&probs(0.01, 0.99, 0.0), 0.99, 0.9).unwrap(), MaxAttempts::Unbounded);
        assert!(matches!(max_attempts(&p, 0.9, 0.95), Err(Error::InfeasibleConstraint { .. })));
        assert_eq!(max_attempts(&probs(0.0, 0.5, 0.5), 0.99, 0.9).unwrap(), MaxAttempts::Capped(MAX_ATTEMPTS_CAP));
    }

    #[test]
    fn max_attempts_matches_linear_scan() {
        let (pdr, pol, link) = presets(0.1);
        let p = attempt_probabilities(&pdr, &pol, &link).unwrap();
        let f0 = 0.9998450058498635;
        let mut scan = 1;
        while protocol_fidelity(scan + 1, &p, f0).unwrap() >= 0.99 {
            scan += 1;
        }
        assert_eq!(max_attempts(&p, f0, 0.99).unwrap(), MaxAttempts::Finite(scan));
    }

    #[test]
    fn timing_examples() {
        let t = ProtocolTiming::reference();
        assert_eq!(expected_failure_time(10, &probs(1.0, 0.0, 0.0), &t).unwrap(), 0.0);
        assert_relative_eq!(
            expected_failure_time(1, &probs(0.5, 0.25, 0.25), &t).unwrap(),
            t.slot() + t.tau_reset,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            expected_success_time(10, &probs(1.0, 0.0, 0.0), &t),
            t.tau_reset + t.slot(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            expected_success_time(1, &probs(0.3, 0.5, 0.2), &t),
            t.tau_reset + t.slot() * 0.3,
            max_relative = 1e-14
        );
    }

    #[test]
    fn preset_timing_oracle() {
        let (pdr, pol, link) = presets(1e-3);
        let p = attempt_probabilities(&pdr, &pol, &link).unwrap();
        let t = ProtocolTiming::reference();
        assert_relative_eq!(expected_failure_time(100, &p, &t).unwrap(), 0.001945851556733973, max_relative = 1e-9);
        assert_relative_eq!(expected_success_time(100, &p, &t), 3.0205079651143377e-05, max_relative = 1e-9);
    }

    #[test]
    fn perfect_link_rate() {
        let p = probs(1.0, 0.0, 0.0);
        let t = ProtocolTiming::reference();
        let r = rate_from_probabilities(&p, 1.0, &t, &RateOptions::default()).unwrap();
        assert_eq!(r.n_max, MaxAttempts::Unbounded);
        assert_relative_eq!(r.rate, 1.0 / (t.tau_reset + t.slot()), max_relative = 1e-14);
    }

    #[test]
    fn bound_examples() {
        let t = ProtocolTiming { tau_reset: 30e-6, tau_pulse: 172e-9, pulse_multiplier: 1.0 };
        assert_relative_eq!(repeaterless_bound(0.5, &t), 1.0 / t.slot(), max_relative = 1e-14);
        assert_relative_eq!(repeaterless_bound(1e-3, &t), 8391.958544585574, max_relative = 1e-9);
        let small = repeaterless_bound(1e-9, &t);
        assert_relative_eq!(small, 1e-9 / (std::f64::consts::LN_2 * t.slot()), max_relative = 1e-8);
    }

    #[test]
    fn regime_thresholds() {
        let t = ProtocolTiming::reference();
        assert_eq!(classify_regime(MaxAttempts::Finite(1), &t, 3), Regime::Fidelity);
        let two_resets = (2.0 * t.tau_reset / t.slot()).round() as u64;
        assert_eq!(classify_regime(MaxAttempts::Finite(two_resets), &t, 3), Regime::Channel);
        assert_eq!(classify_regime(MaxAttempts::Finite(50), &t, 3), Regime::Reset);
        assert_eq!(classify_regime(MaxAttempts::Unbounded, &t, 3), Regime::Channel);
    }

    #[test]
    fn conditional_success_time_is_mean_time_per_success() {
        // tau_reset / P_success + tau / p_det is the renewal-reward mean.
        let p = probs(0.01, 0.98, 0.01);
        let t = ProtocolTiming::reference();
        let n = 40;
        let total = expected_failure_time(n, &p, &t).unwrap() + expected_success_time_conditional(n, &p, &t).unwrap();
        let renewal = t.tau_reset / success_probability(n, &p) + t.slot() / p.p_det;
        assert_relative_eq!(total, renewal, max_relative = 1e-12);
    }
}
