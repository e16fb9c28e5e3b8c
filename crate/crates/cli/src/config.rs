//! Config-file schemas. Runs are driven by TOML files (one `key = value`
//! per line under section headers) so experiment provenance is auditable;
//! unknown keys are rejected and every report embeds the resolved config.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use rotdyn_core::circle::RotationNumber;
use rotdyn_core::systems::{self, ParamValue, SystemSpec};

use crate::CliError;

/// Rotation number: a named constant or a literal value in (0, 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiChoice {
    Named(String),
    Value(f64),
}

impl PhiChoice {
    pub fn resolve(&self) -> Result<RotationNumber, CliError> {
        match self {
            PhiChoice::Named(name) => match name.as_str() {
                "golden" => Ok(RotationNumber::golden()),
                "sqrt2" => Ok(RotationNumber::sqrt2_frac()),
                other => Err(CliError::Config(format!(
                    "unknown rotation name '{other}'; use golden | sqrt2 | a real in (0, 1)"
                ))),
            },
            PhiChoice::Value(v) => {
                RotationNumber::from_value(*v).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub phi: PhiChoice,
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

impl SystemConfig {
    pub fn build(&self) -> Result<SystemSpec, CliError> {
        let phi = self.phi.resolve()?;
        let mut params = BTreeMap::new();
        for (key, value) in &self.params {
            let converted = match value {
                toml::Value::Float(v) => ParamValue::Real(*v),
                toml::Value::Integer(v) => ParamValue::Int(*v),
                toml::Value::Boolean(v) => ParamValue::Flag(*v),
                toml::Value::String(v) => ParamValue::Name(v.clone()),
                other => {
                    return Err(CliError::Config(format!(
                        "parameter '{key}' has unsupported type: {other}"
                    )))
                }
            };
            params.insert(key.clone(), converted);
        }
        systems::from_registry(&self.family, &params, phi)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub trajectory_csv: Option<String>,
    #[serde(default)]
    pub summary_json: Option<String>,
    #[serde(default)]
    pub report_json: Option<String>,
    #[serde(default)]
    pub profile_csv: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub system: SystemConfig,
    pub run: SimulateRun,
    #[serde(default)]
    pub diagnostics: Option<DiagnosticsConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRun {
    /// `x(1)` as `[re, im]`.
    #[serde(default)]
    pub x1: [f64; 2],
    pub steps: u64,
    #[serde(default = "default_stride")]
    pub stride: u64,
}

fn default_stride() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default)]
    pub annulus_low: Option<f64>,
    #[serde(default)]
    pub annulus_width: Option<f64>,
    #[serde(default)]
    pub probe_bound: Option<f64>,
    #[serde(default)]
    pub verify_recurrence: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub envelope: EnvelopeSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    pub phi: PhiChoice,
    pub f_sup: f64,
    pub y_sup: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta_star: f64,
    pub min_window: u64,
    #[serde(default)]
    pub profile_radius: f64,
    #[serde(default)]
    pub start_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawConfig {
    pub powerlaw: PowerLawSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawSection {
    pub phi: PhiChoice,
    pub alpha: f64,
    pub gamma: f64,
    pub forcing_scale: f64,
    pub law_radius: f64,
    pub f_sup: f64,
    #[serde(default)]
    pub y_sup: f64,
    #[serde(default)]
    pub start_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    pub cover: CoverSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSection {
    pub phi: PhiChoice,
    pub delta: f64,
    pub min_measure: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapsConfig {
    pub gaps: GapsSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapsSection {
    pub phi: PhiChoice,
    pub n: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub system: SystemConfig,
    pub profile: ProfileSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub probe_radii: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
}

fn default_grid() -> usize {
    4096
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub system: SystemConfig,
    pub certify: CertifySection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub min_window: u64,
    pub horizon: u64,
    pub probe_radii: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub counterexample: CounterexampleSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSection {
    pub phi: PhiChoice,
    /// orbit-switch | decimal-warp | slow-drift
    pub which: String,
    #[serde(default = "default_ce_steps")]
    pub steps: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// orbit-switch only.
    #[serde(default)]
    pub k1: i64,
    /// slow-drift only: one-plus-t | exp.
    #[serde(default)]
    pub h: Option<String>,
}

fn default_ce_steps() -> u64 {
    10_000
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_cases")]
    pub cases: u64,
}

fn default_cases() -> u64 {
    100_000
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
