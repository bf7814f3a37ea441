//! Grid evaluation over device and link parameters.
//!
//! Cells are pure functions of `(base scenario, overrides, axis values)`, so
//! they are evaluated in parallel and stored by cell index. A cell that cannot
//! be evaluated (negative complementary power, unreachable fidelity target,
//! ...) is tagged rather than aborting the sweep.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{simulate_rate, McConfig, McEstimate};
use crate::numeric::mix_seed;
use crate::rate::{repeaterless_bound, MaxAttempts, RateResult};
use crate::scenario::{db_to_transmissivity, Scenario};

macro_rules! sweep_params {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// A scalar scenario field addressable by a dotted path.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub enum SweepParam { $($variant),* }

        impl SweepParam {
            pub const ALL: &'static [SweepParam] = &[$(SweepParam::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(SweepParam::$variant => $name),* }
            }
        }

        impl FromStr for SweepParam {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(SweepParam::$variant),)*
                    other => Err(Error::InvalidSweep(format!("unknown sweep parameter `{other}`"))),
                }
            }
        }
    };
}

sweep_params! {
    Cooperativity => "cavity.cooperativity",
    KappaWgRatio => "cavity.kappa_wg_ratio",
    DeltaC => "cavity.delta_c",
    DeltaA => "cavity.delta_a",
    TransmissionV => "pdr.t_v",
    ReflectionH => "pdr.r_h",
    ScatteringV => "pdr.zeta_v",
    ScatteringH => "pdr.zeta_h",
    PolarizerV => "polarizer.eta_pol_v",
    PolarizerH => "polarizer.eta_pol_h",
    EtaLink => "link.eta_link",
    EtaDet => "link.eta_det",
    CavityReflectivityV => "link.r_cav_v",
    CavityReflectivityH => "link.r_cav_h",
    Xi => "link.xi",
    TauReset => "timing.tau_reset",
    TauPulse => "timing.tau_pulse",
    PulseMultiplier => "timing.pulse_multiplier",
    FidelityTarget => "rate.f_target",
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<String> for SweepParam {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SweepParam> for String {
    fn from(p: SweepParam) -> String {
        p.name().to_owned()
    }
}

impl SweepParam {
    pub fn apply(self, s: &mut Scenario, value: f64) {
        match self {
            SweepParam::Cooperativity => s.cavity.cooperativity = value,
            SweepParam::KappaWgRatio => s.cavity.kappa_wg_ratio = value,
            SweepParam::DeltaC => s.cavity.delta_c = value,
            SweepParam::DeltaA => s.cavity.delta_a = value,
            SweepParam::TransmissionV => s.pdr.t_v = value,
            SweepParam::ReflectionH => s.pdr.r_h = value,
            SweepParam::ScatteringV => s.pdr.zeta_v = value,
            SweepParam::ScatteringH => s.pdr.zeta_h = value,
            SweepParam::PolarizerV => s.polarizer.eta_pol_v = value,
            SweepParam::PolarizerH => s.polarizer.eta_pol_h = value,
            SweepParam::EtaLink => s.link.eta_link = value,
            SweepParam::EtaDet => s.link.eta_det = value,
            SweepParam::CavityReflectivityV => s.link.r_cav_v = Some(value),
            SweepParam::CavityReflectivityH => s.link.r_cav_h = value,
            SweepParam::Xi => s.link.xi = Some(value),
            SweepParam::TauReset => s.timing.tau_reset = value,
            SweepParam::TauPulse => s.timing.tau_pulse = value,
            SweepParam::PulseMultiplier => s.timing.pulse_multiplier = value,
            SweepParam::FidelityTarget => s.rate.f_target = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
    /// Grid is linear in loss (dB); the parameter receives `10^(-dB/10)`.
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(param: SweepParam, min: f64, max: f64, points: usize) -> Self {
        Self { param, min, max, points, spacing: Spacing::Linear }
    }

    pub fn log(param: SweepParam, min: f64, max: f64, points: usize) -> Self {
        Self { param, min, max, points, spacing: Spacing::Log }
    }

    pub fn loss_db(param: SweepParam, min_db: f64, max_db: f64, points: usize) -> Self {
        Self { param, min: min_db, max: max_db, points, spacing: Spacing::Db }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidSweep(format!("{}: bounds must be finite", self.param)));
        }
        match self.points {
            0 => return Err(Error::InvalidSweep(format!("{}: no points", self.param))),
            1 if self.min != self.max => {
                return Err(Error::InvalidSweep(format!("{}: a single point needs min == max", self.param)))
            }
            n if n >= 2 && self.min >= self.max => {
                return Err(Error::InvalidSweep(format!("{}: need min < max", self.param)))
            }
            _ => {}
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::InvalidSweep(format!("{}: log spacing needs min > 0", self.param)));
        }
        Ok(())
    }

    /// Grid coordinates (dB for `Spacing::Db`).
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.min];
        }
        let step = |i: usize| i as f64 / (n - 1) as f64;
        (0..n)
            .map(|i| match self.spacing {
                Spacing::Linear | Spacing::Db => self.min + (self.max - self.min) * step(i),
                Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * step(i)).exp(),
            })
            .collect()
    }

    /// Value handed to the parameter for a grid coordinate.
    pub fn parameter_value(&self, coordinate: f64) -> f64 {
        match self.spacing {
            Spacing::Db => db_to_transmissivity(coordinate),
            _ => coordinate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Fidelity,
    Rate,
    NMax,
    Regime,
    Bound,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Fidelity => "fidelity",
            Quantity::Rate => "rate",
            Quantity::NMax => "n_max",
            Quantity::Regime => "regime",
            Quantity::Bound => "bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Override {
    pub param: SweepParam,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub overrides: Vec<Override>,
    pub quantity: Quantity,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.axes.len()) {
            return Err(Error::InvalidSweep(format!("need 1 or 2 axes, got {}", self.axes.len())));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::InvalidSweep(format!("axis {} appears twice", self.axes[0].param)));
        }
        Ok(())
    }

    /// T_V × R_H over [0.5, 1] × [0, 0.6], 101 × 101.
    pub fn pdr_grid() -> Self {
        Self {
            axes: vec![
                Axis::linear(SweepParam::TransmissionV, 0.5, 1.0, 101),
                Axis::linear(SweepParam::ReflectionH, 0.0, 0.6, 101),
            ],
            overrides: vec![],
            quantity: Quantity::Fidelity,
        }
    }

    /// C over [0.5, 20], 101 log-spaced points.
    pub fn cooperativity() -> Self {
        Self {
            axes: vec![Axis::log(SweepParam::Cooperativity, 0.5, 20.0, 101)],
            overrides: vec![],
            quantity: Quantity::Fidelity,
        }
    }

    /// κ_wg/κ over [0.05, 1.0] in steps of 0.01.
    pub fn coupling() -> Self {
        Self {
            axes: vec![Axis::linear(SweepParam::KappaWgRatio, 0.05, 1.0, 96)],
            overrides: vec![],
            quantity: Quantity::Fidelity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellValue {
    Value(f64),
    /// `N_max` without bound (no unheralded errors), or the repeaterless
    /// bound of a lossless link.
    Unbounded,
    Infeasible(String),
}

impl CellValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            CellValue::Value(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid {
    pub param: SweepParam,
    pub spacing: Spacing,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    /// The base scenario before overrides and axis values.
    pub scenario: Scenario,
    pub spec: SweepSpec,
    pub code_version: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub quantity: Quantity,
    pub axes: Vec<AxisGrid>,
    /// Row-major: the last axis varies fastest.
    pub cells: Vec<CellValue>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        coords.iter().zip(self.shape()).fold(0, |acc, (&i, n)| acc * n + i)
    }

    pub fn coords_of(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.axes.len()];
        for (k, n) in self.shape().into_iter().enumerate().rev() {
            coords[k] = index % n;
            index /= n;
        }
        coords
    }

    pub fn get(&self, coords: &[usize]) -> &CellValue {
        &self.cells[self.index_of(coords)]
    }

    /// Coordinates (grid values) of the largest finite cell and its value.
    pub fn argmax(&self) -> Option<(Vec<f64>, f64)> {
        let (index, best) = self.cells.iter().enumerate().filter_map(|(i, c)| c.value().map(|v| (i, v))).fold(
            None,
            |acc: Option<(usize, f64)>, (i, v)| match acc {
                Some((_, b)) if b >= v => acc,
                _ => Some((i, v)),
            },
        )?;
        let coords = self.coords_of(index);
        Some((coords.iter().zip(&self.axes).map(|(&i, a)| a.values[i]).collect(), best))
    }

    /// Re-evaluates the sweep from its own metadata.
    pub fn rerun(&self) -> Result<SweepResult> {
        run_sweep(&self.metadata.scenario, &self.metadata.spec)
    }
}

fn evaluate(scenario: &Scenario, quantity: Quantity) -> Result<CellValue> {
    Ok(match quantity {
        Quantity::Fidelity => CellValue::Value(scenario.fidelity()?.f_avg),
        Quantity::Rate => CellValue::Value(scenario.rate()?.rate),
        Quantity::NMax => match scenario.rate()?.n_max {
            MaxAttempts::Unbounded => CellValue::Unbounded,
            n => CellValue::Value(n.as_f64()),
        },
        Quantity::Regime => CellValue::Value(f64::from(scenario.rate()?.regime.number())),
        Quantity::Bound => {
            scenario.timing.validate()?;
            let bound = repeaterless_bound(scenario.link.eta_link, &scenario.timing);
            if bound.is_finite() {
                CellValue::Value(bound)
            } else {
                CellValue::Unbounded
            }
        }
    })
}

pub fn run_sweep(base: &Scenario, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut fixed = *base;
    for o in &spec.overrides {
        o.param.apply(&mut fixed, o.value);
    }
    let axes: Vec<AxisGrid> =
        spec.axes.iter().map(|a| AxisGrid { param: a.param, spacing: a.spacing, values: a.grid() }).collect();
    let shape: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let total: usize = shape.iter().product();

    let cells = (0..total)
        .into_par_iter()
        .map(|index| {
            let mut scenario = fixed;
            let mut rest = index;
            for k in (0..axes.len()).rev() {
                let i = rest % shape[k];
                rest /= shape[k];
                spec.axes[k].param.apply(&mut scenario, spec.axes[k].parameter_value(axes[k].values[i]));
            }
            evaluate(&scenario, spec.quantity).unwrap_or_else(|e| CellValue::Infeasible(e.to_string()))
        })
        .collect();

    Ok(SweepResult {
        quantity: spec.quantity,
        axes,
        cells,
        metadata: SweepMetadata {
            scenario: *base,
            spec: spec.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed: None,
        },
    })
}

/// Fidelity over PDR V transmission × H reflection.
pub fn sweep_fidelity_pdr(base: &Scenario, t_v: Axis, r_h: Axis) -> Result<SweepResult> {
    if t_v.param != SweepParam::TransmissionV || r_h.param != SweepParam::ReflectionH {
        return Err(Error::InvalidSweep("PDR sweep needs pdr.t_v and pdr.r_h axes".into()));
    }
    run_sweep(base, &SweepSpec { axes: vec![t_v, r_h], overrides: vec![], quantity: Quantity::Fidelity })
}

/// Fidelity over cooperativity or waveguide coupling at a fixed PDR.
pub fn sweep_fidelity_cavity(base: &Scenario, axis: Axis) -> Result<SweepResult> {
    if !matches!(axis.param, SweepParam::Cooperativity | SweepParam::KappaWgRatio) {
        return Err(Error::InvalidSweep(format!("cavity sweep cannot vary {}", axis.param)));
    }
    run_sweep(base, &SweepSpec { axes: vec![axis], overrides: vec![], quantity: Quantity::Fidelity })
}

pub const DEFAULT_CONSTRAINTS: [f64; 4] = [0.95, 0.97, 0.98, 0.99];

/// 0 to 60 dB in 0.5 dB steps.
pub fn default_loss_axis() -> Axis {
    Axis::loss_db(SweepParam::EtaLink, 0.0, 60.0, 121)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub loss_db: f64,
    pub eta_link: f64,
    pub analytic: Option<RateResult>,
    /// Why `analytic` is missing.
    pub status: Option<String>,
    /// Repeaterless bound; `None` on a lossless link, where it diverges.
    pub bound: Option<f64>,
    pub monte_carlo: Option<McEstimate>,
    pub mc_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub f_target: f64,
    pub points: Vec<RatePoint>,
    pub scenario: Scenario,
    pub code_version: String,
}

/// Seed used for the Monte Carlo run at `(curve, point)`.
pub fn point_seed(master: u64, curve: usize, point: usize) -> u64 {
    mix_seed(master, ((curve as u64) << 32) | point as u64)
}

/// Analytic rate (and optionally a Monte Carlo estimate) against link loss,
/// one curve per fidelity constraint.
pub fn sweep_rate_vs_loss(
    base: &Scenario,
    loss: &Axis,
    constraints: &[f64],
    mc: Option<&McConfig>,
) -> Result<Vec<RateCurve>> {
    if loss.spacing != Spacing::Db || loss.param != SweepParam::EtaLink {
        return Err(Error::InvalidSweep("rate sweep needs a dB-spaced link.eta_link axis".into()));
    }
    loss.validate()?;
    if let Some(cfg) = mc {
        cfg.validate()?;
    }
    let grid = loss.grid();
    constraints
        .iter()
        .enumerate()
        .map(|(ci, &f_target)| {
            crate::error::check_probability("rate.f_target", f_target)?;
            let points = grid
                .par_iter()
                .enumerate()
                .map(|(pi, &loss_db)| -> Result<RatePoint> {
                    let mut s = base.with_loss_db(loss_db);
                    s.rate.f_target = f_target;
                    let bound = Some(repeaterless_bound(s.link.eta_link, &s.timing)).filter(|b| b.is_finite());
                    let (analytic, status) = match s.rate() {
                        Ok(r) => (Some(r), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    let (monte_carlo, mc_seed) = match (mc, &analytic) {
                        (Some(cfg), Some(r)) => {
                            let cfg = McConfig { seed: point_seed(cfg.seed, ci, pi), ..*cfg };
                            (Some(simulate_rate(&r.probs, r.n_max, &s.timing, &cfg)?), Some(cfg.seed))
                        }
                        _ => (None, None),
                    };
                    Ok(RatePoint { loss_db, eta_link: s.link.eta_link, analytic, status, bound, monte_carlo, mc_seed })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RateCurve { f_target, points, scenario: *base, code_version: env!("CARGO_PKG_VERSION").to_owned() })
        })
        .collect()
}
