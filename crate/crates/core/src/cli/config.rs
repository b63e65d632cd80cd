//! Run configuration: one JSON document with a `command` discriminator.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::biphoton::TwoPhotonKind;
use crate::lattice::LatticeSpec;
use crate::transform::InputProfile;

/// JSON schema of the configuration document, shipped with the crate.
pub const CONFIG_SCHEMA: &str = include_str!("../../schemas/config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Lattice,
    Transform,
    Biphoton,
    Continuum,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lattice => "lattice",
            Self::Transform => "transform",
            Self::Biphoton => "biphoton",
            Self::Continuum => "continuum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Unit of the entries of `z_values`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZUnit {
    /// Normalized transform order `Z = kappa0 z`.
    #[default]
    Order,
    /// Physical propagation length in cm.
    Cm,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: CommandKind,
    #[serde(default)]
    lattice: Option<RawLattice>,
    #[serde(default)]
    payload: Value,
    #[serde(default)]
    z_values: Option<Vec<f64>>,
    #[serde(default)]
    z_unit: ZUnit,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    #[serde(rename = "N")]
    size: usize,
    #[serde(default = "unit_kappa")]
    kappa0: f64,
}

fn unit_kappa() -> f64 {
    1.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    path: Option<PathBuf>,
    #[serde(default)]
    format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayConfig {
    /// Sites per unit of continuous coordinate; defaults to `gamma^{1/4}`.
    #[serde(default)]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformPayload {
    pub profile: InputProfile,
    #[serde(default)]
    pub overlay: Option<OverlayConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiphotonPayload {
    pub kind: TwoPhotonKind,
    pub sites: [f64; 2],
    #[serde(default)]
    pub beamsplitter: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumPayload {
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_sizes")]
    pub n_values: Vec<usize>,
}

fn default_levels() -> Vec<usize> {
    (0..=4).collect()
}

fn default_sizes() -> Vec<usize> {
    vec![21, 41, 81, 161]
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Lattice,
    Transform(TransformPayload),
    Biphoton(BiphotonPayload),
    Continuum(ContinuumPayload),
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub lattice: Option<LatticeSpec>,
    pub payload: Payload,
    /// Transform orders, already converted from cm when `z_unit` was `cm`.
    pub z_values: Vec<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn lattice(&self) -> Result<&LatticeSpec, CliError> {
        self.lattice
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{}: a \"lattice\" section is required", self.command.name())))
    }
}

fn payload_of<T: for<'de> Deserialize<'de>>(command: CommandKind, value: Value) -> Result<T, CliError> {
    let value = if value.is_null() {
        Value::Object(Default::default())
    } else {
        value
    };
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("payload for \"{}\": {e}", command.name())))
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config does not match the schema: {e}")))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, CliError> {
    let mut problems = Vec::new();
    let command = raw.command;

    let lattice = match raw.lattice {
        Some(l) => match LatticeSpec::new(l.size, l.kappa0) {
            Ok(s) => Some(s),
            Err(e) => {
                problems.push(format!("lattice: {e}"));
                None
            }
        },
        None => {
            if command != CommandKind::Continuum {
                problems.push(format!("lattice: required for the \"{}\" command", command.name()));
            }
            None
        }
    };

    let payload = match command {
        CommandKind::Lattice => {
            if !(raw.payload.is_null() || raw.payload.as_object().is_some_and(|o| o.is_empty())) {
                problems.push("payload: the lattice command takes no payload".to_string());
            }
            Payload::Lattice
        }
        CommandKind::Transform => {
            let p = payload_of::<TransformPayload>(command, raw.payload)?;
            if let Some(OverlayConfig { scale: Some(s) }) = &p.overlay {
                if !(s.is_finite() && *s > 0.0) {
                    problems.push(format!("payload.overlay.scale: must be positive, got {s}"));
                }
            }
            Payload::Transform(p)
        }
        CommandKind::Biphoton => {
            let p = payload_of::<BiphotonPayload>(command, raw.payload)?;
            if p.sites[0] == p.sites[1] {
                problems.push("payload.sites: the two preparation sites must differ".to_string());
            }
            if p.beamsplitter && p.kind != TwoPhotonKind::Separable {
                problems.push("payload.beamsplitter: needs a separable input pair".to_string());
            }
            Payload::Biphoton(p)
        }
        CommandKind::Continuum => {
            let p = payload_of::<ContinuumPayload>(command, raw.payload)?;
            if p.levels.is_empty() || p.n_values.is_empty() {
                problems.push("payload: levels and n_values must be non-empty".to_string());
            } else {
                let top = *p.levels.iter().max().unwrap();
                let smallest = *p.n_values.iter().min().unwrap();
                if smallest < 2 {
                    problems.push("payload.n_values: lattices need at least 2 sites".to_string());
                }
                if top >= smallest {
                    problems.push(format!(
                        "payload: level {top} requires every N in n_values to exceed it (smallest is {smallest})"
                    ));
                }
            }
            Payload::Continuum(p)
        }
    };

    let mut z_values = raw.z_values.unwrap_or_else(|| vec![FRAC_PI_2]);
    if z_values.is_empty() {
        problems.push("z_values: must not be empty".to_string());
    }
    if z_values.iter().any(|z| !z.is_finite()) {
        problems.push("z_values: entries must be finite".to_string());
    }
    if raw.z_unit == ZUnit::Cm {
        match &lattice {
            Some(spec) => z_values.iter_mut().for_each(|z| *z = spec.order_at_length(*z)),
            None => problems.push("z_unit \"cm\" needs a lattice with kappa0".to_string()),
        }
    }

    if !problems.is_empty() {
        return Err(CliError::Config(problems.join("\n")));
    }
    Ok(RunConfig {
        command,
        lattice,
        payload,
        z_values,
        output_path: raw.output.path,
        format: raw.output.format.unwrap_or_default(),
    })
}
