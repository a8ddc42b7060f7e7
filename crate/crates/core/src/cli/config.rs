//! JSON run configuration.
//!
//! ```json
//! {
//!   "preset": "sodium-paper",
//!   "params": { "temperature": 1e-7 },
//!   "drive": { "rabi_effective": 1000.0, "t_max": 0.006 },
//!   "rate_query": { "qbar": [0.05, 5.0], "temperature": [0.0], "channel": "single-level" },
//!   "output": { "directory": "out", "format": "csv" }
//! }
//! ```
//!
//! A preset supplies every field; anything given explicitly overrides it.
//! Without a preset, `params`, `drive` and `rate_query` must be complete.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DriveConfig, DynamicsError};
use crate::model::{ModelError, PhysicalParams, TwoLevel};
use crate::rates::Channel;

pub const PRESETS: &[&str] = &["sodium-paper"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: parse error at line {line}, column {column}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{key}`: {reason}")]
    Schema { key: String, reason: String },
    #[error("unknown preset `{0}` (available: sodium-paper)")]
    UnknownPreset(String),
}

fn schema(key: impl Into<String>, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Schema {
        key: key.into(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    params: Option<RawParams>,
    drive: Option<RawDrive>,
    rate_query: Option<RawRateQuery>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    scattering_length: Option<f64>,
    atomic_mass: Option<f64>,
    condensate_density: Option<f64>,
    volume: Option<f64>,
    atom_count: Option<f64>,
    temperature: Option<f64>,
    a_bc: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    rabi_effective: Option<f64>,
    rabi_bare: Option<f64>,
    qbar_recoil: Option<f64>,
    gamma_override: Option<f64>,
    t_max: Option<f64>,
    dt_output: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRateQuery {
    qbar: Option<Vec<f64>>,
    temperature: Option<Vec<f64>>,
    channel: Option<Channel>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateGrid {
    /// Sorted, de-duplicated momenta (units of k0).
    pub qbar: Vec<f64>,
    /// Sorted, de-duplicated temperatures (K).
    pub temperature: Vec<f64>,
    pub channel: Channel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: OutputFormat,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub params: PhysicalParams,
    pub drive: DriveConfig,
    /// Single-atom two-photon Rabi frequency (s^-1), recorded for reference;
    /// the dynamics use `drive.rabi_effective`.
    pub rabi_bare: Option<f64>,
    pub rate_query: RateGrid,
    pub output: OutputConfig,
}

struct Preset {
    params: PhysicalParams,
    drive: DriveConfig,
    rabi_bare: Option<f64>,
    grid: RateGrid,
}

fn preset(name: &str) -> Result<Preset, ConfigError> {
    match name {
        "sodium-paper" => Ok(Preset {
            params: PhysicalParams::sodium_paper(),
            drive: DriveConfig::sodium_paper(),
            rabi_bare: Some(1.0),
            grid: RateGrid {
                qbar: vec![5.0],
                temperature: vec![0.0],
                channel: Channel::SingleLevel,
            },
        }),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "quasidamp-out";

fn pick<T: Copy>(explicit: Option<T>, base: Option<T>, key: &str) -> Result<T, ConfigError> {
    explicit
        .or(base)
        .ok_or_else(|| schema(key, "required when no preset is given"))
}

fn resolve_params(
    raw: RawParams,
    base: Option<&PhysicalParams>,
) -> Result<PhysicalParams, ConfigError> {
    let b = |f: fn(&PhysicalParams) -> f64| base.map(f);
    let n0 = pick(
        raw.condensate_density,
        b(|p| p.condensate_density),
        "params.condensate_density",
    )?;
    let volume = pick(raw.volume, b(|p| p.volume), "params.volume")?;
    // A preset's atom count only carries over when density and volume do.
    let derived_count = if raw.condensate_density.is_some() || raw.volume.is_some() {
        None
    } else {
        b(|p| p.atom_count)
    };
    let params = PhysicalParams {
        scattering_length: pick(
            raw.scattering_length,
            b(|p| p.scattering_length),
            "params.scattering_length",
        )?,
        atomic_mass: pick(raw.atomic_mass, b(|p| p.atomic_mass), "params.atomic_mass")?,
        condensate_density: n0,
        volume,
        atom_count: raw.atom_count.or(derived_count).unwrap_or(n0 * volume),
        temperature: raw.temperature.or(b(|p| p.temperature)).unwrap_or(0.0),
        two_level: raw
            .a_bc
            .map(|a_bc| TwoLevel { a_bc })
            .or(base.and_then(|p| p.two_level)),
    };
    params.validate().map_err(|e| match e {
        ModelError::Domain {
            name,
            value,
            reason,
        } => schema(format!("params.{name}"), format!("{value}: {reason}")),
        e @ ModelError::AtomCount { .. } => schema("params.atom_count", e),
    })?;
    Ok(params)
}

fn resolve_drive(raw: &RawDrive, base: Option<&DriveConfig>) -> Result<DriveConfig, ConfigError> {
    let b = |f: fn(&DriveConfig) -> f64| base.map(f);
    let drive = DriveConfig {
        rabi_effective: pick(
            raw.rabi_effective,
            b(|d| d.rabi_effective),
            "drive.rabi_effective",
        )?,
        qbar_recoil: pick(raw.qbar_recoil, b(|d| d.qbar_recoil), "drive.qbar_recoil")?,
        gamma_override: raw.gamma_override.or(base.and_then(|d| d.gamma_override)),
        t_max: pick(raw.t_max, b(|d| d.t_max), "drive.t_max")?,
        dt_output: pick(raw.dt_output, b(|d| d.dt_output), "drive.dt_output")?,
    };
    drive.validate().map_err(|e| match e {
        DynamicsError::Domain {
            name,
            value,
            reason,
        } => schema(format!("drive.{name}"), format!("{value}: {reason}")),
        other => schema("drive", other),
    })?;
    Ok(drive)
}

fn resolve_grid(
    list: Option<Vec<f64>>,
    base: Option<&Vec<f64>>,
    key: &str,
    positive: bool,
) -> Result<Vec<f64>, ConfigError> {
    let mut values = match (list, base) {
        (Some(v), _) => v,
        (None, Some(b)) => b.clone(),
        (None, None) => return Err(schema(key, "required when no preset is given")),
    };
    if values.is_empty() {
        return Err(schema(key, "must not be empty"));
    }
    for (i, &v) in values.iter().enumerate() {
        let ok = v.is_finite() && if positive { v > 0.0 } else { v >= 0.0 };
        if !ok {
            let need = if positive {
                "finite and positive"
            } else {
                "finite and non-negative"
            };
            return Err(schema(key, format!("entry {i} is {v}; must be {need}")));
        }
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

/// Parses and validates configuration text. `path` only labels errors.
pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = match e.path().to_string() {
            root if root == "." => "(root)".to_string(),
            key => key,
        };
        let inner = e.into_inner();
        if inner.is_data() {
            schema(key, inner)
        } else {
            ConfigError::Parse {
                path: path.to_path_buf(),
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        }
    })?;

    let base = raw.preset.as_deref().map(preset).transpose()?;
    let params = resolve_params(
        raw.params.unwrap_or_default(),
        base.as_ref().map(|p| &p.params),
    )?;
    let raw_drive = raw.drive.unwrap_or_default();
    let drive = resolve_drive(&raw_drive, base.as_ref().map(|p| &p.drive))?;
    let rabi_bare = raw_drive
        .rabi_bare
        .or(base.as_ref().and_then(|p| p.rabi_bare));
    if let Some(r) = rabi_bare {
        if !(r.is_finite() && r >= 0.0) {
            return Err(schema(
                "drive.rabi_bare",
                format!("{r}: must be finite and non-negative"),
            ));
        }
    }
    let rq = raw.rate_query.unwrap_or_default();
    let grid = base.as_ref().map(|p| &p.grid);
    let rate_query = RateGrid {
        qbar: resolve_grid(rq.qbar, grid.map(|g| &g.qbar), "rate_query.qbar", true)?,
        temperature: resolve_grid(
            rq.temperature,
            grid.map(|g| &g.temperature),
            "rate_query.temperature",
            false,
        )?,
        channel: rq
            .channel
            .or(grid.map(|g| g.channel))
            .unwrap_or(Channel::SingleLevel),
    };
    let out = raw.output.unwrap_or_default();
    Ok(RunConfig {
        preset: raw.preset,
        params,
        drive,
        rabi_bare,
        rate_query,
        output: OutputConfig {
            directory: out
                .directory
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            format: out.format.unwrap_or_default(),
        },
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(text, Path::new("test.json"))
    }

    fn schema_key(text: &str) -> String {
        match parse(text) {
            Err(ConfigError::Schema { key, .. }) => key,
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn preset_expands_to_paper_parameters() {
        let cfg = parse(r#"{"preset": "sodium-paper"}"#).unwrap();
        assert_eq!(cfg.params, PhysicalParams::sodium_paper());
        assert_eq!(cfg.drive, DriveConfig::sodium_paper());
        assert_eq!(cfg.rabi_bare, Some(1.0));
        assert_eq!(cfg.rate_query.qbar, vec![5.0]);
        let units = crate::model::derive_units(&cfg.params).unwrap();
        assert!((units.k0 / 2.65e6 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn explicit_fields_override_preset() {
        let cfg = parse(
            r#"{"preset": "sodium-paper", "params": {"temperature": 1e-7},
                "rate_query": {"qbar": [0.1, 0.05, 0.1], "channel": "two-level"},
                "output": {"format": "json", "directory": "x"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.params.temperature, 1e-7);
        assert_eq!(cfg.rate_query.qbar, vec![0.05, 0.1]);
        assert_eq!(cfg.rate_query.channel, Channel::TwoLevel);
        assert_eq!(cfg.output.format, OutputFormat::Json);
        assert_eq!(cfg.output.directory, PathBuf::from("x"));
    }

    #[test]
    fn empty_or_malformed_text_is_a_parse_error() {
        assert!(matches!(parse(""), Err(ConfigError::Parse { .. })));
        match parse("{\n  \"preset\": \"sodium-paper\",\n  oops\n}") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_momentum_names_its_key() {
        assert_eq!(
            schema_key(r#"{"preset": "sodium-paper", "rate_query": {"qbar": [-1]}}"#),
            "rate_query.qbar"
        );
        assert_eq!(
            schema_key(r#"{"preset": "sodium-paper", "rate_query": {"temperature": []}}"#),
            "rate_query.temperature"
        );
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        assert_eq!(
            schema_key(r#"{"preset": "sodium-paper", "params": {"mass": 1}}"#),
            "params.mass"
        );
        let err = parse(r#"{"preset": "sodium-paper", "params": {"mass": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("mass"), "{err}");
        assert_eq!(schema_key(r#"{"bogus": 1}"#), "bogus");
    }

    #[test]
    fn wrong_types_name_their_key() {
        assert_eq!(
            schema_key(r#"{"preset": "sodium-paper", "drive": {"t_max": "soon"}}"#),
            "drive.t_max"
        );
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            parse(r#"{"preset": "rubidium"}"#),
            Err(ConfigError::UnknownPreset(_))
        ));
    }

    #[test]
    fn missing_fields_without_preset() {
        assert_eq!(schema_key("{}"), "params.condensate_density");
        let full_params = r#""params": {"scattering_length": 2.8e-9, "atomic_mass": 3.8e-26,
            "condensate_density": 1e20, "volume": 1e-14}"#;
        assert_eq!(
            schema_key(&format!("{{{full_params}}}")),
            "drive.rabi_effective"
        );
    }

    #[test]
    fn domain_violations_name_their_key() {
        assert_eq!(
            schema_key(r#"{"preset": "sodium-paper", "params": {"scattering_length": -1}}"#),
            "params.scattering_length"
        );
        assert_eq!(
            schema_key(r#"{"preset": "sodium-paper", "params": {"atom_count": 5}}"#),
            "params.atom_count"
        );
        assert_eq!(
            schema_key(r#"{"preset": "sodium-paper", "drive": {"dt_output": 0}}"#),
            "drive.dt_output"
        );
        // Overriding the density re-derives the atom count.
        let cfg =
            parse(r#"{"preset": "sodium-paper", "params": {"condensate_density": 2e20}}"#).unwrap();
        assert_eq!(cfg.params.atom_count, 2e6);
    }

    #[test]
    fn io_error_for_missing_file() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/quasidamp.json")),
            Err(ConfigError::Io { .. })
        ));
    }
}
