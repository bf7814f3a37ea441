//! Power-level description of a device and link, as used by sweeps and configs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::device::{effective_reflection, EffectiveReflections, PdrParams, PolarizerParams, ReflectionPhase};
use crate::error::{Error, Result};
use crate::fidelity::{transfer_fidelity, FidelityReport};
use crate::rate::{
    attempt_probabilities, transfer_rate, AttemptProbabilities, LinkParams, ProtocolTiming, RateOptions, RateResult,
};

/// Cavity design figures. Rates are in units of `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySpec {
    pub cooperativity: f64,
    pub kappa_wg_ratio: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub delta_c: f64,
    pub delta_a: f64,
    /// `[re, im]` field reflection of the H mode behind the PDR.
    pub h_mode_reflection: Complex64,
}

impl CavitySpec {
    pub fn params(&self) -> Result<CavityParams> {
        let cav = CavityParams::from_cooperativity(self.cooperativity, self.kappa_wg_ratio, self.kappa, self.gamma)?
            .with_detunings(self.delta_c, self.delta_a)
            .with_h_mode_reflection(self.h_mode_reflection);
        cav.validate()?;
        Ok(cav)
    }
}

/// PDR powers. The complementary powers follow from fixed scattering:
/// `R_V = 1 - T_V - ζ_V`, `T_H = 1 - R_H - ζ_H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdrSpec {
    pub t_v: f64,
    pub r_h: f64,
    pub zeta_v: f64,
    pub zeta_h: f64,
    pub reflection_phase: ReflectionPhase,
}

impl PdrSpec {
    pub fn params(&self) -> Result<PdrParams> {
        let r_v = 1.0 - self.t_v - self.zeta_v;
        let t_h = 1.0 - self.r_h - self.zeta_h;
        if r_v < -1e-12 {
            return Err(Error::param("pdr.t_v", format!("T_V + zeta_V = {} exceeds 1", self.t_v + self.zeta_v)));
        }
        if t_h < -1e-12 {
            return Err(Error::param("pdr.r_h", format!("R_H + zeta_H = {} exceeds 1", self.r_h + self.zeta_h)));
        }
        for (name, z) in [("pdr.zeta_v", self.zeta_v), ("pdr.zeta_h", self.zeta_h)] {
            if !(0.0..=1.0).contains(&z) {
                return Err(Error::param(name, format!("{z} is outside [0, 1]")));
            }
        }
        PdrParams::from_powers(self.t_v, r_v.max(0.0), t_h.max(0.0), self.r_h, self.reflection_phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub eta_link: f64,
    pub eta_det: f64,
    /// Spin-averaged V cavity reflectivity; `None` derives it from the cavity.
    pub r_cav_v: Option<f64>,
    pub r_cav_h: f64,
    /// `None` means `1 - r_cav_h`: every non-reflected H photon counts as an error.
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub cavity: CavitySpec,
    pub pdr: PdrSpec,
    pub polarizer: PolarizerParams,
    pub link: LinkSpec,
    pub timing: ProtocolTiming,
    pub rate: RateOptions,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::reference_design()
    }
}

impl Scenario {
    /// The reference device: C = 4, κ_wg/κ = 0.73, T_V = 0.99, R_H = 0.15,
    /// polarizer 98.9 % / 12.8 %, R_cav,V = 35.6 %, R_cav,H = 92.1 %,
    /// η_det = 93.6 %, 30 µs reset, 5.81 MHz clock, at 30 dB link loss.
    pub fn reference_design() -> Self {
        Self {
            cavity: CavitySpec {
                cooperativity: 4.0,
                kappa_wg_ratio: 0.73,
                kappa: 1.0,
                gamma: 1.0,
                delta_c: 0.0,
                delta_a: 0.0,
                h_mode_reflection: Complex64::new(-(0.921f64.sqrt()), 0.0),
            },
            pdr: PdrSpec {
                t_v: 0.99,
                r_h: 0.15,
                zeta_v: 0.0,
                zeta_h: 0.0,
                reflection_phase: ReflectionPhase::Negative,
            },
            polarizer: PolarizerParams { eta_pol_v: 0.989, eta_pol_h: 0.128 },
            link: LinkSpec { eta_link: 1e-3, eta_det: 0.936, r_cav_v: Some(0.356), r_cav_h: 0.921, xi: None },
            timing: ProtocolTiming::reference(),
            rate: RateOptions::default(),
        }
    }

    /// Fills every derived or defaulted field and validates the result.
    pub fn resolve(&self) -> Result<Scenario> {
        let mut s = *self;
        let cavity = s.cavity.params()?;
        if s.link.r_cav_v.is_none() {
            s.link.r_cav_v = Some(cavity.mean_v_reflectivity()?);
        }
        if s.link.xi.is_none() {
            s.link.xi = Some((1.0 - s.link.r_cav_h).max(0.0));
        }
        s.pdr.params()?;
        s.polarizer.validate()?;
        s.link_params()?;
        s.timing.validate()?;
        crate::error::check_probability("rate.f_target", s.rate.f_target)?;
        Ok(s)
    }

    pub fn cavity_params(&self) -> Result<CavityParams> {
        self.cavity.params()
    }

    pub fn pdr_params(&self) -> Result<PdrParams> {
        self.pdr.params()
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        let r_cav_v_avg = match self.link.r_cav_v {
            Some(r) => r,
            None => self.cavity_params()?.mean_v_reflectivity()?,
        };
        let link = LinkParams {
            eta_link: self.link.eta_link,
            eta_det: self.link.eta_det,
            xi: self.link.xi.unwrap_or((1.0 - self.link.r_cav_h).max(0.0)),
            r_cav_v_avg,
            r_cav_h: self.link.r_cav_h,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn effective_reflections(&self) -> Result<EffectiveReflections> {
        effective_reflection(&self.pdr_params()?, &self.polarizer, &self.cavity_params()?)
    }

    pub fn fidelity(&self) -> Result<FidelityReport> {
        transfer_fidelity(&self.pdr_params()?, &self.polarizer, &self.cavity_params()?)
    }

    pub fn probabilities(&self) -> Result<AttemptProbabilities> {
        attempt_probabilities(&self.pdr_params()?, &self.polarizer, &self.link_params()?)
    }

    pub fn rate(&self) -> Result<RateResult> {
        transfer_rate(
            &self.pdr_params()?,
            &self.polarizer,
            &self.cavity_params()?,
            &self.link_params()?,
            &self.timing,
            &self.rate,
        )
    }

    /// Link transmissivity for a loss in dB.
    pub fn with_loss_db(mut self, loss_db: f64) -> Self {
        self.link.eta_link = db_to_transmissivity(loss_db);
        self
    }
}

pub fn db_to_transmissivity(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_design_resolves() {
        let s = Scenario::reference_design().resolve().unwrap();
        assert_eq!(s.link.xi, Some(1.0 - 0.921));
        assert_eq!(s.link.r_cav_v, Some(0.356));
        let f = s.fidelity().unwrap().f_avg;
        assert!(f >= 0.999, "F = {f}");
    }

    #[test]
    fn derived_cavity_reflectivity() {
        let mut s = Scenario::reference_design();
        s.link.r_cav_v = None;
        let r = s.resolve().unwrap().link.r_cav_v.unwrap();
        assert_abs_diff_eq!(r, 0.356, epsilon = 2e-3);
    }

    #[test]
    fn complements_follow_scattering() {
        let spec =
            PdrSpec { t_v: 0.9, r_h: 0.2, zeta_v: 0.05, zeta_h: 0.1, reflection_phase: ReflectionPhase::Negative };
        let pdr = spec.params().unwrap();
        assert_abs_diff_eq!(pdr.reflection_v(), 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(pdr.transmission_h(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(pdr.scattering_v(), 0.05, epsilon = 1e-12);
        let bad = PdrSpec { t_v: 0.99, zeta_v: 0.05, ..spec };
        assert!(bad.params().is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = Scenario::reference_design();
        let text = serde_json::to_string(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
