//! Spin-dependent reflection off a single-sided cavity, from input-output theory.
//!
//! A waveguide photon reflecting off the cavity picks up
//!
//! ```text
//! r(ω) = 1 - κ_wg / [ (iΔc + κ/2) (1 + g² / ((iΔc + κ/2)(iΔa + γ/2))) ]
//! ```
//!
//! with `Δc = ω_c - ω` and `Δa = ω_a - ω`. The uncoupled spin state sees the
//! bare cavity (`g = 0`); on resonance and with `κ_wg = κ` that is a `-1` mirror,
//! while the coupled state approaches `+1` as the cooperativity grows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_positive, Error, Result};

/// Atom-cavity rates. All rates share one (arbitrary) angular-frequency unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Total cavity energy decay rate κ.
    pub kappa: f64,
    /// Decay rate into the waveguide κ_wg.
    pub kappa_wg: f64,
    /// Atomic relaxation rate γ.
    pub gamma: f64,
    /// Atom-cavity coupling g.
    pub g: f64,
    /// Cavity detuning ω_c - ω.
    pub delta_c: f64,
    /// Atom detuning ω_a - ω.
    pub delta_a: f64,
    /// Field reflection seen by H light behind the PDR. The H mode does not
    /// couple to the spin, so the same value serves both spin states.
    pub h_mode_reflection: Complex64,
}

impl CavityParams {
    /// Builds rates from the dimensionless design figures, holding κ and γ fixed.
    pub fn from_cooperativity(cooperativity: f64, kappa_wg_ratio: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if !(cooperativity.is_finite() && cooperativity >= 0.0) {
            return Err(Error::param("cooperativity", format!("{cooperativity} must be finite and >= 0")));
        }
        let params = Self {
            kappa,
            kappa_wg: kappa_wg_ratio * kappa,
            gamma,
            g: (cooperativity * kappa * gamma / 4.0).sqrt(),
            delta_c: 0.0,
            delta_a: 0.0,
            h_mode_reflection: Complex64::new(-1.0, 0.0),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_detunings(mut self, delta_c: f64, delta_a: f64) -> Self {
        self.delta_c = delta_c;
        self.delta_a = delta_a;
        self
    }

    pub fn with_h_mode_reflection(mut self, r: Complex64) -> Self {
        self.h_mode_reflection = r;
        self
    }

    /// C = 4g²/(κγ).
    pub fn cooperativity(&self) -> f64 {
        4.0 * self.g * self.g / (self.kappa * self.gamma)
    }

    pub fn kappa_wg_ratio(&self) -> f64 {
        self.kappa_wg / self.kappa
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("kappa", self.kappa)?;
        check_positive("gamma", self.gamma)?;
        check_finite("g", self.g)?;
        check_finite("delta_c", self.delta_c)?;
        check_finite("delta_a", self.delta_a)?;
        if self.g < 0.0 {
            return Err(Error::param("g", format!("{} must be >= 0", self.g)));
        }
        if !(self.kappa_wg >= 0.0 && self.kappa_wg <= self.kappa) {
            return Err(Error::param("kappa_wg", format!("{} must lie in [0, kappa = {}]", self.kappa_wg, self.kappa)));
        }
        let h = self.h_mode_reflection;
        if !(h.re.is_finite() && h.im.is_finite()) || h.norm_sqr() > 1.0 + 1e-12 {
            return Err(Error::param("h_mode_reflection", format!("|{h}| must be finite and <= 1")));
        }
        Ok(())
    }

    /// Average power reflectivity of the V mode over the two spin states.
    pub fn mean_v_reflectivity(&self) -> Result<f64> {
        let on = cavity_reflection(self, true)?;
        let off = cavity_reflection(self, false)?;
        Ok((on.norm_sqr() + off.norm_sqr()) / 2.0)
    }
}

/// Field reflection of the V cavity mode. `coupled = false` evaluates the bare cavity (g = 0).
pub fn cavity_reflection(cavity: &CavityParams, coupled: bool) -> Result<Complex64> {
    cavity.validate()?;
    let g = if coupled { cavity.g } else { 0.0 };
    let cav = Complex64::new(cavity.kappa / 2.0, cavity.delta_c);
    let atom = Complex64::new(cavity.gamma / 2.0, cavity.delta_a);
    let dressing = 1.0 + (g * g) / (cav * atom);
    Ok(1.0 - cavity.kappa_wg / (cav * dressing))
}

/// Resonant, critically-overcoupled (`κ_wg = κ`) reflection: (C-1)/(C+1).
pub fn large_cooperativity_reflection(cooperativity: f64) -> f64 {
    (cooperativity - 1.0) / (cooperativity + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn design() -> CavityParams {
        CavityParams::from_cooperativity(4.0, 0.73, 1.0, 1.0).unwrap()
    }

    #[test]
    fn bare_overcoupled_mirror_is_minus_one() {
        let cav = CavityParams::from_cooperativity(0.0, 1.0, 1.0, 1.0).unwrap();
        let r = cavity_reflection(&cav, false).unwrap();
        assert_abs_diff_eq!(r.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn design_point_reflections() {
        let cav = design();
        let on = cavity_reflection(&cav, true).unwrap();
        let off = cavity_reflection(&cav, false).unwrap();
        assert_abs_diff_eq!(on.re, 1.0 - 2.0 * 0.73 / 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(off.re, 1.0 - 2.0 * 0.73, epsilon = 1e-12);
        assert_abs_diff_eq!(on.re, 0.708, epsilon = 1e-12);
        assert_abs_diff_eq!(off.re, -0.46, epsilon = 1e-12);
        assert_abs_diff_eq!(cav.mean_v_reflectivity().unwrap(), 0.356, epsilon = 2e-3);
    }

    #[test]
    fn large_cooperativity_approaches_limit() {
        let cav = CavityParams::from_cooperativity(1e3, 1.0, 1.0, 1.0).unwrap();
        let r = cavity_reflection(&cav, true).unwrap();
        assert!((r.re - large_cooperativity_reflection(1e3)).abs() < 2e-3);
        assert!(r.im.abs() < 1e-12);
    }

    #[test]
    fn cooperativity_round_trips() {
        let cav = CavityParams::from_cooperativity(7.5, 0.4, 2.0, 0.3).unwrap();
        assert_abs_diff_eq!(cav.cooperativity(), 7.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cav.kappa_wg_ratio(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonpositive_rates() {
        let mut cav = design();
        cav.kappa = 0.0;
        assert!(matches!(cavity_reflection(&cav, true), Err(Error::InvalidParameter { name: "kappa", .. })));
        let mut cav = design();
        cav.gamma = -1.0;
        assert!(matches!(cavity_reflection(&cav, true), Err(Error::InvalidParameter { name: "gamma", .. })));
        let mut cav = design();
        cav.kappa_wg = 1.5;
        assert!(cav.validate().is_err());
    }
}
