//! Joint photon-spin amplitudes and heralded projection onto the spin.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::{ComplexAmplitude, EffectiveReflections};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
/// Branches with less squared norm than this cannot herald anything.
const MIN_HERALD: f64 = 1e-300;

/// Polarization qubit `α|H⟩ + β|V⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonQubit {
    pub alpha: ComplexAmplitude,
    pub beta: ComplexAmplitude,
}

impl PhotonQubit {
    pub fn new(alpha: ComplexAmplitude, beta: ComplexAmplitude) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::param("photon", format!("|α|² + |β|² = {norm}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// Normalizes arbitrary (nonzero) amplitudes.
    pub fn normalized(alpha: ComplexAmplitude, beta: ComplexAmplitude) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::param("photon", "amplitudes must be finite and not both zero"));
        }
        Ok(Self { alpha: alpha / norm, beta: beta / norm })
    }

    pub fn with_global_phase(self, phase: f64) -> Self {
        let u = Complex64::from_polar(1.0, phase);
        Self { alpha: self.alpha * u, beta: self.beta * u }
    }

    /// The spin state this photon should be mapped onto: `α|↓⟩ + β|↑⟩`.
    pub fn target_spin(&self) -> SpinState {
        SpinState { amp_down: self.alpha, amp_up: self.beta }
    }
}

/// Spin amplitudes on `{|↓⟩, |↑⟩}`; not necessarily normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub amp_down: ComplexAmplitude,
    pub amp_up: ComplexAmplitude,
}

impl SpinState {
    pub fn norm_sqr(&self) -> f64 {
        self.amp_down.norm_sqr() + self.amp_up.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SpinState) -> Complex64 {
        self.amp_down.conj() * other.amp_down + self.amp_up.conj() * other.amp_up
    }

    /// `|⟨self|other⟩|²` with both states normalized.
    pub fn fidelity(&self, other: &SpinState) -> f64 {
        let overlap = self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr());
        overlap.clamp(0.0, 1.0)
    }

    fn scaled(self, k: f64) -> Self {
        Self { amp_down: self.amp_down * k, amp_up: self.amp_up * k }
    }

    fn hadamard(self) -> Self {
        Self {
            amp_down: (self.amp_down + self.amp_up) * FRAC_1_SQRT_2,
            amp_up: (self.amp_down - self.amp_up) * FRAC_1_SQRT_2,
        }
    }

    fn phase_flip(self) -> Self {
        Self { amp_down: self.amp_down, amp_up: -self.amp_up }
    }
}

/// Detector that clicked, in the photon basis after the half-wave plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    HAfterHwp,
    VAfterHwp,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::HAfterHwp, Outcome::VAfterHwp];

    pub fn label(self) -> &'static str {
        match self {
            Outcome::HAfterHwp => "H",
            Outcome::VAfterHwp => "V",
        }
    }
}

/// Photon ⊗ spin amplitudes after reflection and the HWP, indexed
/// `[photon][spin]` with photon `0 = H, 1 = V` and spin `0 = ↓, 1 = ↑`.
///
/// Amplitudes are left unnormalized; missing norm is light that was lost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub amps: [[ComplexAmplitude; 2]; 2],
}

impl JointState {
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().flatten().map(|a| a.norm_sqr()).sum()
    }

    pub fn branch(&self, outcome: Outcome) -> SpinState {
        let row = match outcome {
            Outcome::HAfterHwp => self.amps[0],
            Outcome::VAfterHwp => self.amps[1],
        };
        SpinState { amp_down: row[0], amp_up: row[1] }
    }
}

/// Reflects `photon` off the device with the spin prepared in `(|↓⟩ + |↑⟩)/√2`.
///
/// The spin superposition and the HWP (`H -> H + V`, `V -> V - H`) each carry
/// a `1/√2`, hence the overall `1/2`.
pub fn evolve_joint_state(photon: &PhotonQubit, eff: &EffectiveReflections) -> JointState {
    let (a, b) = (photon.alpha, photon.beta);
    JointState {
        amps: [
            [(a * eff.r_h_on - b * eff.r_v_on) * 0.5, (a * eff.r_h_off - b * eff.r_v_off) * 0.5],
            [(a * eff.r_h_on + b * eff.r_v_on) * 0.5, (a * eff.r_h_off + b * eff.r_v_off) * 0.5],
        ],
    }
}

/// Projects onto the detected photon branch and applies the spin correction.
///
/// Returns the probability of the click and the normalized, corrected spin
/// state. An H click needs a Hadamard; a V click needs the Hadamard followed
/// by a π phase flip.
pub fn herald_spin_state(joint: &JointState, outcome: Outcome) -> Result<(f64, SpinState)> {
    let branch = joint.branch(outcome);
    let p = branch.norm_sqr();
    if p < MIN_HERALD {
        return Err(Error::UnheraldableOutcome(outcome.label()));
    }
    let spin = branch.scaled(1.0 / p.sqrt()).hadamard();
    let spin = match outcome {
        Outcome::HAfterHwp => spin,
        Outcome::VAfterHwp => spin.phase_flip(),
    };
    Ok((p, spin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ideal_v_branch_substitution() {
        let s = FRAC_1_SQRT_2;
        let photon = PhotonQubit::new(c(s, 0.0), c(s, 0.0)).unwrap();
        let joint = evolve_joint_state(&photon, &EffectiveReflections::ideal());
        // V branch: α(-1 + 1)/2 on ↓, α(-1 - 1)/2 on ↑.
        assert_abs_diff_eq!(joint.amps[1][0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(joint.amps[1][1].re, -s, epsilon = 1e-15);
    }

    #[test]
    fn total_loss_gives_zero_state() {
        let photon = PhotonQubit::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let joint = evolve_joint_state(&photon, &EffectiveReflections::zero());
        assert_eq!(joint.norm_sqr(), 0.0);
        assert!(matches!(herald_spin_state(&joint, Outcome::HAfterHwp), Err(Error::UnheraldableOutcome("H"))));
    }

    #[test]
    fn h_input_copies_h_coefficients() {
        let eff = EffectiveReflections {
            r_h_on: c(-0.56, 0.0),
            r_h_off: c(-0.55, 0.01),
            r_v_on: c(0.54, 0.0),
            r_v_off: c(-0.57, 0.0),
        };
        let photon = PhotonQubit::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let joint = evolve_joint_state(&photon, &eff);
        let expected = [eff.r_h_on / 2.0, eff.r_h_off / 2.0, eff.r_h_on / 2.0, eff.r_h_off / 2.0];
        for (got, want) in joint.amps.iter().flatten().zip(expected) {
            assert_abs_diff_eq!((got - want).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn ideal_h_click_maps_photon_to_spin() {
        let eff = EffectiveReflections::ideal();
        for (a, b) in [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.6, 0.0), c(0.0, 0.8)), (c(0.3, 0.4), c(-0.5, 0.2))] {
            let photon = PhotonQubit::normalized(a, b).unwrap();
            let joint = evolve_joint_state(&photon, &eff);
            let (p, spin) = herald_spin_state(&joint, Outcome::HAfterHwp).unwrap();
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(spin.fidelity(&photon.target_spin()), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn v_click_needs_the_phase_flip() {
        let s = FRAC_1_SQRT_2;
        let photon = PhotonQubit::new(c(s, 0.0), c(s, 0.0)).unwrap();
        let joint = evolve_joint_state(&photon, &EffectiveReflections::ideal());
        let (_, spin) = herald_spin_state(&joint, Outcome::VAfterHwp).unwrap();
        assert_abs_diff_eq!(spin.fidelity(&photon.target_spin()), 1.0, epsilon = 1e-12);

        // Undo the flip: the Hadamard alone leaves α|↓⟩ - β|↑⟩.
        let unflipped = spin.phase_flip();
        let wrong = SpinState { amp_down: photon.alpha, amp_up: -photon.beta };
        assert_abs_diff_eq!(unflipped.fidelity(&wrong), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(unflipped.fidelity(&photon.target_spin()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_unnormalized_photon() {
        assert!(PhotonQubit::new(c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }
}
