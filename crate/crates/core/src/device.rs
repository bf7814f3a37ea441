//! Polarization-dependent reflector (PDR), polarizer and the PDR-cavity etalon.
//!
//! Light of polarization `i` either reflects straight off the PDR (`r_i`) or
//! crosses it, passes the polarizer twice, bounces off the cavity and rings
//! down inside the PDR-cavity etalon:
//!
//! ```text
//! r_eff = r_i + r_cav t_i² / (1 - r_cav r_i),   |t_i|² -> η_pol,i |t_i|²
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{cavity_reflection, CavityParams};
use crate::error::{check_probability, Error, Result};

/// Dimensionless field amplitude.
pub type ComplexAmplitude = Complex64;

const POWER_TOL: f64 = 1e-12;
const PASSIVITY_TOL: f64 = 1e-9;
const DEGENERATE_ETALON: f64 = 1e-12;

/// Sign attached to PDR field reflections built from power values.
///
/// Only powers are known for the reflector, so the reflection phase is a
/// convention. `Negative` treats the PDR like a dielectric mirror seen from
/// the input side (`r = -√R`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReflectionPhase {
    #[default]
    Negative,
    Positive,
}

impl ReflectionPhase {
    pub fn sign(self) -> f64 {
        match self {
            ReflectionPhase::Negative => -1.0,
            ReflectionPhase::Positive => 1.0,
        }
    }
}

/// Field transmission/reflection of the PDR for each polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdrParams {
    pub t_h: ComplexAmplitude,
    pub r_h: ComplexAmplitude,
    pub t_v: ComplexAmplitude,
    pub r_v: ComplexAmplitude,
}

impl PdrParams {
    /// Real field coefficients from power values: `t = √T`, `r = ±√R`.
    pub fn from_powers(t_v: f64, r_v: f64, t_h: f64, r_h: f64, phase: ReflectionPhase) -> Result<Self> {
        for (name, p) in [("pdr.t_v", t_v), ("pdr.r_v", r_v), ("pdr.t_h", t_h), ("pdr.r_h", r_h)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("{p} is outside [0, 1]")));
            }
        }
        let s = phase.sign();
        let pdr = Self {
            t_h: Complex64::new(t_h.sqrt(), 0.0),
            r_h: Complex64::new(s * r_h.sqrt(), 0.0),
            t_v: Complex64::new(t_v.sqrt(), 0.0),
            r_v: Complex64::new(s * r_v.sqrt(), 0.0),
        };
        pdr.validate()?;
        Ok(pdr)
    }

    /// A reflector that passes V untouched and reflects H perfectly.
    pub fn ideal() -> Self {
        Self {
            t_h: Complex64::new(0.0, 0.0),
            r_h: Complex64::new(-1.0, 0.0),
            t_v: Complex64::new(1.0, 0.0),
            r_v: Complex64::new(0.0, 0.0),
        }
    }

    pub fn transmission_v(&self) -> f64 {
        self.t_v.norm_sqr()
    }
    pub fn reflection_v(&self) -> f64 {
        self.r_v.norm_sqr()
    }
    pub fn transmission_h(&self) -> f64 {
        self.t_h.norm_sqr()
    }
    pub fn reflection_h(&self) -> f64 {
        self.r_h.norm_sqr()
    }

    /// ζ_V = 1 - T_V - R_V.
    pub fn scattering_v(&self) -> f64 {
        (1.0 - self.transmission_v() - self.reflection_v()).max(0.0)
    }

    /// ζ_H = 1 - T_H - R_H.
    pub fn scattering_h(&self) -> f64 {
        (1.0 - self.transmission_h() - self.reflection_h()).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("pdr.t_h", self.t_h), ("pdr.r_h", self.r_h), ("pdr.t_v", self.t_v), ("pdr.r_v", self.r_v)] {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::param(name, "coefficient must be finite"));
            }
        }
        let sum_v = self.transmission_v() + self.reflection_v();
        if sum_v > 1.0 + POWER_TOL {
            return Err(Error::param("pdr.t_v", format!("T_V + R_V = {sum_v} exceeds 1")));
        }
        let sum_h = self.transmission_h() + self.reflection_h();
        if sum_h > 1.0 + POWER_TOL {
            return Err(Error::param("pdr.t_h", format!("T_H + R_H = {sum_h} exceeds 1")));
        }
        Ok(())
    }
}

/// Single-pass power transmission of the V-pass polarizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizerParams {
    pub eta_pol_v: f64,
    pub eta_pol_h: f64,
}

impl PolarizerParams {
    pub fn transparent() -> Self {
        Self { eta_pol_v: 1.0, eta_pol_h: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("polarizer.eta_pol_v", self.eta_pol_v)?;
        check_probability("polarizer.eta_pol_h", self.eta_pol_h)?;
        if self.eta_pol_v < self.eta_pol_h {
            return Err(Error::param(
                "polarizer.eta_pol_v",
                format!("a V-pass polarizer needs eta_pol_v ({}) >= eta_pol_h ({})", self.eta_pol_v, self.eta_pol_h),
            ));
        }
        Ok(())
    }
}

/// Round-trip field reflection for each polarization and spin state
/// (`on`: spin coupled to the cavity, `off`: uncoupled).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveReflections {
    pub r_h_on: ComplexAmplitude,
    pub r_h_off: ComplexAmplitude,
    pub r_v_on: ComplexAmplitude,
    pub r_v_off: ComplexAmplitude,
}

impl EffectiveReflections {
    /// The lossless ideal coefficients: H mirrors (-1), V picks up a
    /// spin-dependent sign.
    pub fn ideal() -> Self {
        Self {
            r_h_on: Complex64::new(-1.0, 0.0),
            r_h_off: Complex64::new(-1.0, 0.0),
            r_v_on: Complex64::new(1.0, 0.0),
            r_v_off: Complex64::new(-1.0, 0.0),
        }
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { r_h_on: z, r_h_off: z, r_v_on: z, r_v_off: z }
    }

    pub fn as_array(&self) -> [(&'static str, ComplexAmplitude); 4] {
        [("r_h_on", self.r_h_on), ("r_h_off", self.r_h_off), ("r_v_on", self.r_v_on), ("r_v_off", self.r_v_off)]
    }
}

fn etalon(polarization: &'static str, r: Complex64, t: Complex64, eta_pol: f64, r_cav: Complex64) -> Result<Complex64> {
    let denominator = 1.0 - r_cav * r;
    if denominator.norm() < DEGENERATE_ETALON {
        return Err(Error::DegenerateEtalon { polarization, denominator: denominator.norm() });
    }
    // |t|² -> η|t|² scales the field by √η on each pass.
    let t_sq = t * t * eta_pol;
    Ok(r + r_cav * t_sq / denominator)
}

pub fn effective_reflection(
    pdr: &PdrParams,
    polarizer: &PolarizerParams,
    cavity: &CavityParams,
) -> Result<EffectiveReflections> {
    pdr.validate()?;
    polarizer.validate()?;
    let coupled = cavity_reflection(cavity, true)?;
    let uncoupled = cavity_reflection(cavity, false)?;
    let r_h_cav = cavity.h_mode_reflection;

    let eff = EffectiveReflections {
        r_h_on: etalon("H", pdr.r_h, pdr.t_h, polarizer.eta_pol_h, r_h_cav)?,
        r_h_off: etalon("H", pdr.r_h, pdr.t_h, polarizer.eta_pol_h, r_h_cav)?,
        r_v_on: etalon("V", pdr.r_v, pdr.t_v, polarizer.eta_pol_v, coupled)?,
        r_v_off: etalon("V", pdr.r_v, pdr.t_v, polarizer.eta_pol_v, uncoupled)?,
    };
    for (coefficient, r) in eff.as_array() {
        let magnitude = r.norm();
        if !magnitude.is_finite() || magnitude > 1.0 + PASSIVITY_TOL {
            return Err(Error::NonPassiveEtalon { coefficient, magnitude });
        }
    }
    Ok(eff)
}

/// `| |r_H,on - r_V,on| - |r_H,off + r_V,off| |`: zero when the two spin
/// branches of an equal-weight input lose the same amount of light.
pub fn loss_balance_residual(eff: &EffectiveReflections) -> f64 {
    ((eff.r_h_on - eff.r_v_on).norm() - (eff.r_h_off + eff.r_v_off).norm()).abs()
}
