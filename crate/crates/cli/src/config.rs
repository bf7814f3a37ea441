//! Run configuration: preset expansion, JSON file merge, `key=value`
//! overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use spinlink::montecarlo::McConfig;
use spinlink::rate::{ProtocolTiming, RateOptions};
use spinlink::scenario::{CavitySpec, LinkSpec, PdrSpec, Scenario};
use spinlink::sweep::{default_loss_axis, Axis, SweepSpec, DEFAULT_CONSTRAINTS};
use spinlink::{ComplexAmplitude, PolarizerParams};

use crate::error::{CliError, CliResult};

pub const DEFAULT_PRESET: &str = "reference";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fidelity,
    Rate,
    Sweep,
    Montecarlo,
    Diagnose,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::Fidelity, Command::Rate, Command::Sweep, Command::Montecarlo, Command::Diagnose];

    pub fn name(self) -> &'static str {
        match self {
            Command::Fidelity => "fidelity",
            Command::Rate => "rate",
            Command::Sweep => "sweep",
            Command::Montecarlo => "montecarlo",
            Command::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}` (expected fidelity, rate, sweep, montecarlo or diagnose)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Rate against link loss, one curve per fidelity constraint.
    RateVsLoss { loss: Axis, constraints: Vec<f64>, monte_carlo: bool },
    /// A one- or two-axis grid of a single quantity.
    Grid { spec: SweepSpec },
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::RateVsLoss {
            loss: default_loss_axis(),
            constraints: DEFAULT_CONSTRAINTS.to_vec(),
            monte_carlo: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// `None` writes to stdout.
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub cavity: CavitySpec,
    pub pdr: PdrSpec,
    pub polarizer: PolarizerParams,
    pub link: LinkSpec,
    pub timing: ProtocolTiming,
    pub rate: RateOptions,
    pub monte_carlo: McConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_scenario(preset: &str, s: Scenario) -> Self {
        Self {
            preset: preset.to_owned(),
            cavity: s.cavity,
            pdr: s.pdr,
            polarizer: s.polarizer,
            link: s.link,
            timing: s.timing,
            rate: s.rate,
            monte_carlo: McConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            cavity: self.cavity,
            pdr: self.pdr,
            polarizer: self.polarizer,
            link: self.link,
            timing: self.timing,
            rate: self.rate,
        }
    }

    /// Validates every section and fills derived scenario fields in place.
    pub fn resolve(mut self) -> CliResult<Self> {
        let s = self.scenario().resolve()?;
        self.link = s.link;
        self.monte_carlo.validate()?;
        match &self.sweep {
            SweepConfig::RateVsLoss { loss, constraints, .. } => {
                if loss.spacing != spinlink::sweep::Spacing::Db {
                    return Err(CliError::Config("sweep.loss must use db spacing".into()));
                }
                loss.validate()?;
                if constraints.is_empty() {
                    return Err(CliError::Config("sweep.constraints is empty".into()));
                }
                if let Some(c) = constraints.iter().find(|c| !(0.0..=1.0).contains(*c)) {
                    return Err(CliError::Config(format!("sweep.constraints: {c} is outside [0, 1]")));
                }
            }
            SweepConfig::Grid { spec } => spec.validate()?,
        }
        Ok(self)
    }

    /// SHA-256 of the canonical JSON form. Output settings are left out:
    /// they choose where results go, not what they are.
    pub fn hash(&self) -> String {
        let keyed = Self { output: OutputConfig::default(), ..self.clone() };
        let text = serde_json::to_string(&keyed).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

type Preset = (&'static str, fn() -> Scenario);

const PRESETS: [Preset; 3] = [
    ("reference", Scenario::reference_design),
    // H arm sees a perfect mirror instead of the 92.1 % cavity reflectivity.
    ("reference-mirror", || {
        let mut s = Scenario::reference_design();
        s.cavity.h_mode_reflection = ComplexAmplitude::new(-1.0, 0.0);
        s
    }),
    // Four pulse periods per attempt (dynamical decoupling overhead).
    ("reference-4x-slot", || {
        let mut s = Scenario::reference_design();
        s.timing.pulse_multiplier = 4.0;
        s
    }),
];

pub fn preset(name: &str) -> CliResult<RunConfig> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, make)| RunConfig::from_scenario(n, make()))
        .ok_or_else(|| CliError::UnknownPreset(name.to_owned(), preset_names().join(", ")))
}

fn parse_json(text: &str, source_name: &str) -> CliResult<Value> {
    if text.trim().is_empty() {
        return Ok(Value::Object(Map::new()));
    }
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        source_name: source_name.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Recursive object merge; an object whose `kind` differs replaces the base outright.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            let kind_changes = matches!((b.get("kind"), p.get("kind")), (Some(x), Some(y)) if x != y);
            if kind_changes {
                *b = p;
                return;
            }
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Dotted paths of every leaf (non-object value) in `v`.
fn leaf_paths(v: &Value, prefix: &str, out: &mut Vec<String>) {
    if let Value::Object(map) = v {
        for (k, child) in map {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            if child.is_object() {
                leaf_paths(child, &path, out);
            } else {
                out.push(path);
            }
        }
    }
}

/// Resolves a dotted key, or a bare key that names exactly one leaf.
fn resolve_key(root: &Value, key: &str) -> CliResult<Vec<String>> {
    let mut leaves = Vec::new();
    leaf_paths(root, "", &mut leaves);
    if leaves.iter().any(|l| l == key) {
        return Ok(key.split('.').map(str::to_owned).collect());
    }
    let suffix = format!(".{key}");
    let matches: Vec<&String> = leaves.iter().filter(|l| l.ends_with(&suffix)).collect();
    match matches.as_slice() {
        [] => Err(CliError::UnknownKey(format!("`{key}`"))),
        [one] => Ok(one.split('.').map(str::to_owned).collect()),
        many => Err(CliError::AmbiguousKey {
            key: key.to_owned(),
            candidates: many.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "),
        }),
    }
}

/// Applies one `key=value` override. The value is read as JSON when it
/// parses, otherwise as a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let path = resolve_key(root, key)?;
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_owned()));
    let mut slot = root;
    for part in &path {
        slot = slot.get_mut(part).ok_or_else(|| CliError::UnknownKey(key.to_owned()))?;
    }
    *slot = value;
    Ok(())
}

fn from_value(v: Value) -> CliResult<RunConfig> {
    serde_json::from_value(v).map_err(|e| {
        let msg = e.to_string();
        if msg.starts_with("unknown field") {
            CliError::UnknownKey(msg)
        } else {
            CliError::Config(msg)
        }
    })
}

/// Preset, then the optional JSON file, then `key=value` overrides, then
/// validation.
pub fn load_config(path: Option<&Path>, preset_name: Option<&str>, overrides: &[String]) -> CliResult<RunConfig> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_json(&text, &p.display().to_string())?
        }
        None => Value::Object(Map::new()),
    };
    let name = preset_name
        .map(str::to_owned)
        .or_else(|| file.get("preset").and_then(Value::as_str).map(str::to_owned))
        .unwrap_or_else(|| DEFAULT_PRESET.to_owned());
    let mut root = serde_json::to_value(preset(&name)?).expect("preset serializes");
    merge(&mut root, file);
    root["preset"] = Value::String(name);
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    from_value(root)?.resolve()
}
