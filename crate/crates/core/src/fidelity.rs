//! Four-state average transfer fidelity.
//!
//! Each of the inputs `(|H⟩ ± |V⟩)/√2` and `(|H⟩ ± i|V⟩)/√2` should land on the
//! matching spin state. Per input, the two detector outcomes are averaged with
//! their herald probabilities as weights; the device fidelity is the plain mean
//! over the four inputs. Detector efficiency and gate errors are not included.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::device::{effective_reflection, EffectiveReflections, PdrParams, PolarizerParams};
use crate::error::{Error, Result};
use crate::state::{evolve_joint_state, herald_spin_state, Outcome, PhotonQubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetState {
    /// (|↓⟩ + |↑⟩)/√2
    PlusX,
    /// (|↓⟩ - |↑⟩)/√2
    MinusX,
    /// (|↓⟩ + i|↑⟩)/√2
    PlusY,
    /// (|↓⟩ - i|↑⟩)/√2
    MinusY,
}

impl TargetState {
    pub const ALL: [TargetState; 4] =
        [TargetState::PlusX, TargetState::MinusX, TargetState::PlusY, TargetState::MinusY];

    pub fn label(self) -> &'static str {
        match self {
            TargetState::PlusX => "phi1",
            TargetState::MinusX => "phi2",
            TargetState::PlusY => "phi3",
            TargetState::MinusY => "phi4",
        }
    }

    pub fn photon(self) -> PhotonQubit {
        let s = FRAC_1_SQRT_2;
        let beta = match self {
            TargetState::PlusX => Complex64::new(s, 0.0),
            TargetState::MinusX => Complex64::new(-s, 0.0),
            TargetState::PlusY => Complex64::new(0.0, s),
            TargetState::MinusY => Complex64::new(0.0, -s),
        };
        PhotonQubit { alpha: Complex64::new(s, 0.0), beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFidelity {
    pub outcome: Outcome,
    pub herald_prob: f64,
    /// `None` when the branch carries no amplitude.
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFidelity {
    pub target: TargetState,
    pub fidelity: f64,
    pub outcomes: [OutcomeFidelity; 2],
}

/// Per-outcome summary over the four inputs: mean herald probability and the
/// herald-weighted conditional fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub outcome: Outcome,
    pub herald_prob: f64,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub f_avg: f64,
    pub per_input: Vec<InputFidelity>,
    pub per_outcome: [OutcomeSummary; 2],
}

impl FidelityReport {
    pub fn input(&self, target: TargetState) -> Option<&InputFidelity> {
        self.per_input.iter().find(|i| i.target == target)
    }
}

/// Heralded fidelity for a single input.
pub fn input_fidelity(photon: &PhotonQubit, eff: &EffectiveReflections) -> Result<(f64, [OutcomeFidelity; 2])> {
    let joint = evolve_joint_state(photon, eff);
    let target = photon.target_spin();
    let outcomes = Outcome::ALL.map(|outcome| match herald_spin_state(&joint, outcome) {
        Ok((herald_prob, spin)) => OutcomeFidelity { outcome, herald_prob, fidelity: Some(target.fidelity(&spin)) },
        Err(_) => OutcomeFidelity { outcome, herald_prob: 0.0, fidelity: None },
    });
    let (num, den) = outcomes.iter().fold((0.0, 0.0), |(num, den), o| match o.fidelity {
        Some(f) => (num + o.herald_prob * f, den + o.herald_prob),
        None => (num, den),
    });
    if den == 0.0 {
        return Err(Error::DeviceOpaque("photon"));
    }
    Ok(((num / den).clamp(0.0, 1.0), outcomes))
}

/// Average fidelity for a given set of round-trip coefficients.
pub fn fidelity_from_reflections(eff: &EffectiveReflections) -> Result<FidelityReport> {
    let mut per_input = Vec::with_capacity(4);
    for target in TargetState::ALL {
        let (fidelity, outcomes) = input_fidelity(&target.photon(), eff).map_err(|e| match e {
            Error::DeviceOpaque(_) => Error::DeviceOpaque(target.label()),
            other => other,
        })?;
        per_input.push(InputFidelity { target, fidelity, outcomes });
    }
    let f_avg = per_input.iter().map(|i| i.fidelity).sum::<f64>() / 4.0;

    let per_outcome = [0, 1].map(|k| {
        let herald_prob = per_input.iter().map(|i| i.outcomes[k].herald_prob).sum::<f64>() / 4.0;
        let weighted: f64 =
            per_input.iter().filter_map(|i| i.outcomes[k].fidelity.map(|f| f * i.outcomes[k].herald_prob)).sum();
        OutcomeSummary {
            outcome: Outcome::ALL[k],
            herald_prob,
            fidelity: (herald_prob > 0.0).then(|| weighted / (4.0 * herald_prob)),
        }
    });
    Ok(FidelityReport { f_avg, per_input, per_outcome })
}

pub fn transfer_fidelity(
    pdr: &PdrParams,
    polarizer: &PolarizerParams,
    cavity: &CavityParams,
) -> Result<FidelityReport> {
    let eff = effective_reflection(pdr, polarizer, cavity)?;
    fidelity_from_reflections(&eff)
}
