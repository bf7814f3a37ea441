use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violated one of its documented bounds.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// `1 - r_cav * r` vanished: the PDR-cavity etalon sits exactly on a lossless resonance.
    #[error("degenerate etalon for {polarization} polarization: |1 - r_cav r| = {denominator:e}")]
    DegenerateEtalon { polarization: &'static str, denominator: f64 },

    /// The round-trip coefficients returned more light than was sent in.
    #[error("non-passive etalon: |{coefficient}| = {magnitude} exceeds 1")]
    NonPassiveEtalon { coefficient: &'static str, magnitude: f64 },

    #[error("unheraldable outcome: the {0} detector branch carries no amplitude")]
    UnheraldableOutcome(&'static str),

    #[error("device opaque: no detector outcome can herald input {0}")]
    DeviceOpaque(&'static str),

    #[error("inconsistent device parameters: {0}")]
    InconsistentProbabilities(String),

    #[error("infeasible constraint: target fidelity {target} exceeds single-attempt fidelity {f0}")]
    InfeasibleConstraint { target: f64, f0: f64 },

    #[error("detection probability is zero; the protocol never succeeds")]
    ZeroDetection,

    #[error("no detection within {0} attempts")]
    NoDetection(u64),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors caused by a fidelity target the device cannot meet.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::InfeasibleConstraint { .. })
    }

    /// True for errors raised by parameter validation rather than by evaluation.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::InconsistentProbabilities(_) | Error::InvalidSweep(_))
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::param(name, format!("{value} is outside [0, 1]")));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::param(name, format!("{value} must be finite and > 0")));
    }
    Ok(())
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::param(name, format!("{value} must be finite")));
    }
    Ok(())
}
