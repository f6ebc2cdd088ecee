//! Job documents: parsing, defaults and validation.
//!
//! A job is a JSON object; `docs/job.schema.json` describes the same shape.
//! Unknown keys are rejected and every error names the offending path.

use std::f64::consts::PI;
use std::path::PathBuf;

use lpbk::partition::Transition;
use lpbk::spaces::SpaceParams;
use lpbk::spectral::{GridSpec, Preset, PresetParams};
use lpbk::verify::{CheckParams, CATALOG};
use serde::{Deserialize, Serialize};

use crate::JobError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Norm,
    Bands,
    Op,
    Verify,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_period")]
    pub period: f64,
}

fn default_dim() -> usize {
    1
}

fn default_n() -> usize {
    256
}

fn default_period() -> f64 {
    2.0 * PI
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: default_dim(),
            n: default_n(),
            period: default_period(),
        }
    }
}

/// Operator applied by the `op` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpConfig {
    Lift {
        alpha: f64,
    },
    /// 1-based axis.
    Riesz {
        axis: usize,
    },
    Heat {
        t: f64,
    },
    Maximal {
        #[serde(default = "default_eta")]
        eta: f64,
    },
}

fn default_eta() -> f64 {
    1.0
}

/// A check id, optionally with parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckEntry {
    Id(String),
    WithParams {
        id: String,
        #[serde(default)]
        params: Box<CheckParams>,
    },
}

impl CheckEntry {
    pub fn id(&self) -> &str {
        match self {
            CheckEntry::Id(id) | CheckEntry::WithParams { id, .. } => id,
        }
    }

    pub fn params(&self) -> CheckParams {
        match self {
            CheckEntry::Id(_) => CheckParams::default(),
            CheckEntry::WithParams { params, .. } => (**params).clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default = "default_generator")]
    pub generator: String,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub params: PresetParams,
}

fn default_generator() -> String {
    "default".to_string()
}

fn default_count() -> usize {
    20
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            generator: default_generator(),
            count: default_count(),
            params: PresetParams::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default)]
    pub profile: Transition,
    /// Bands removed before any computation.
    #[serde(default)]
    pub zero_bands: Vec<i32>,
    /// Also write the band multipliers as `partition.csv`.
    #[serde(default)]
    pub dump: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem; defaults to the command name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// Where the input field comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Preset { name: String, params: PresetParams },
    Sample(PathBuf),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    #[serde(default)]
    grid: GridConfig,
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    params: Option<PresetParams>,
    #[serde(default)]
    sample: Option<PathBuf>,
    #[serde(default)]
    spaces: Vec<SpaceParams>,
    #[serde(default)]
    op: Option<OpConfig>,
    #[serde(default)]
    checks: Vec<CheckEntry>,
    #[serde(default)]
    family: FamilyConfig,
    #[serde(default)]
    partition: PartitionConfig,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: OutputConfig,
}

/// A validated job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub grid: GridSpec,
    pub source: Option<Source>,
    pub spaces: Vec<SpaceParams>,
    pub op: Option<OpConfig>,
    pub checks: Vec<CheckEntry>,
    pub family: FamilyConfig,
    pub partition: PartitionConfig,
    pub seed: u64,
    pub output: OutputConfig,
}

const SEEDED_PRESETS: &[&str] = &["random_bandlimited", "nonnegative_spectrum"];

fn invalid(msg: impl Into<String>) -> JobError {
    JobError::Config(msg.into())
}

/// Parses and validates a job document.
pub fn parse_config(text: &str) -> Result<JobConfig, JobError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        invalid(format!("at `{path}`: {}", e.inner()))
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<JobConfig, JobError> {
    let grid = GridSpec::new(raw.grid.dim, raw.grid.n, raw.grid.period)
        .map_err(|e| invalid(format!("at `grid`: {e}")))?;

    let source = match (raw.preset, raw.sample) {
        (Some(_), Some(_)) => return Err(invalid("`preset` and `sample` are mutually exclusive")),
        (Some(name), None) => {
            let params = raw.params.unwrap_or_default();
            Preset::from_params(&name, &params, &grid)
                .map_err(|e| invalid(format!("at `preset`: {e}")))?;
            Some(Source::Preset { name, params })
        }
        (None, Some(path)) => {
            if raw.params.is_some() {
                return Err(invalid("`params` belongs to `preset`, not `sample`"));
            }
            Some(Source::Sample(path))
        }
        (None, None) => {
            if raw.params.is_some() {
                return Err(invalid("`params` given without `preset`"));
            }
            None
        }
    };

    for (i, space) in raw.spaces.iter().enumerate() {
        space
            .validate()
            .map_err(|e| invalid(format!("at `spaces[{i}]`: {e}")))?;
    }
    for (i, check) in raw.checks.iter().enumerate() {
        if !CATALOG.contains(&check.id()) {
            return Err(invalid(format!(
                "at `checks[{i}]`: unknown check `{}`",
                check.id()
            )));
        }
    }
    if raw.family.count == 0 {
        return Err(invalid("at `family.count`: must be at least 1"));
    }
    if let Some(name) = &raw.output.name {
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(invalid(format!(
                "at `output.name`: `{name}` is not a plain file stem"
            )));
        }
    }

    let cfg = JobConfig {
        command: raw.command,
        grid,
        source,
        spaces: raw.spaces,
        op: raw.op,
        checks: raw.checks,
        family: raw.family,
        partition: raw.partition,
        seed: raw.seed,
        output: raw.output,
    };
    cfg.check_command()?;
    Ok(cfg)
}

impl JobConfig {
    fn check_command(&self) -> Result<(), JobError> {
        let needs_source = matches!(self.command, Command::Norm | Command::Bands | Command::Op);
        if needs_source && self.source.is_none() {
            return Err(invalid(format!(
                "command `{}` needs exactly one of `preset` or `sample`",
                self.command_name()
            )));
        }
        match self.command {
            Command::Norm | Command::Bands if self.spaces.is_empty() => {
                return Err(invalid(format!(
                    "command `{}` needs `spaces`",
                    self.command_name()
                )));
            }
            Command::Op if self.op.is_none() => return Err(invalid("command `op` needs `op`")),
            Command::Verify if self.checks.is_empty() => {
                return Err(invalid(
                    "command `verify` needs at least one entry in `checks`",
                ));
            }
            Command::Report => {
                if self.checks.is_empty() && self.source.is_none() {
                    return Err(invalid(
                        "command `report` needs `checks` or a function source",
                    ));
                }
                if self.source.is_some() && self.spaces.is_empty() {
                    return Err(invalid(
                        "command `report` with a function source needs `spaces`",
                    ));
                }
                if self.output.format == Format::Csv {
                    return Err(invalid("command `report` writes JSON only"));
                }
            }
            _ => {}
        }
        if !self.checks.is_empty() && self.partition.profile != Transition::Exp {
            return Err(invalid(
                "checks run on the default cutoff; drop `partition.profile`",
            ));
        }
        Ok(())
    }

    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Norm => "norm",
            Command::Bands => "bands",
            Command::Op => "op",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }

    /// Replaces the job seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Preset parameters with the job seed filled in for seeded presets that
    /// do not name one.
    pub fn preset_params(&self, name: &str, params: &PresetParams) -> PresetParams {
        let mut params = params.clone();
        if SEEDED_PRESETS.contains(&name) && !params.contains_key("seed") {
            params.insert("seed".to_string(), self.seed as f64);
        }
        params
    }

    pub fn file_stem(&self) -> String {
        self.output
            .name
            .clone()
            .unwrap_or_else(|| self.command_name().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpbk::spaces::SpaceKind;
    use lpbk::spectral::Exponent;

    #[test]
    fn minimal_norm_job() {
        let cfg = parse_config(
            r#"{"command":"norm","preset":"weierstrass","params":{"s":0.5},
                "spaces":[{"s":0.5,"p":"inf","q":"inf","kind":"besov_homog"}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.grid, GridSpec::unit_circle(256).unwrap());
        assert_eq!(cfg.spaces[0].q, Exponent::Infinite);
        assert_eq!(cfg.spaces[0].kind, SpaceKind::BesovHomog);
        assert!(matches!(cfg.source, Some(Source::Preset { .. })));
    }

    #[test]
    fn missing_command_is_named() {
        let err = parse_config(r#"{"preset":"sign"}"#).unwrap_err();
        assert!(err.to_string().contains("command"), "{err}");
    }

    #[test]
    fn errors_carry_the_path() {
        let err = parse_config(
            r#"{"command":"norm","preset":"sign","spaces":[{"s":1,"p":2,"q":-1,"kind":"besov_homog"}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("spaces[0].q"), "{err}");
        let err = parse_config(r#"{"command":"verify","checks":["lq_monotone"],"grid":{"m":3}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("grid"), "{err}");
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(parse_config(r#"{"command":"verify","checks":["nope"]}"#).is_err());
        let err = parse_config(r#"{"command":"op","preset":"nope","op":{"name":"heat","t":1}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("nope"));
        assert!(parse_config(
            r#"{"command":"op","preset":"sign","op":{"name":"heat","t":1,"x":2}}"#
        )
        .is_err());
    }

    #[test]
    fn command_invariants() {
        assert!(parse_config(r#"{"command":"verify","checks":[]}"#).is_err());
        assert!(parse_config(
            r#"{"command":"norm","spaces":[{"s":0,"p":2,"q":2,"kind":"besov_homog"}]}"#
        )
        .is_err());
        assert!(parse_config(
            r#"{"command":"norm","preset":"sign","sample":"x.csv","spaces":[{"s":0,"p":2,"q":2,"kind":"besov_homog"}]}"#
        )
        .is_err());
        assert!(parse_config(
            r#"{"command":"report","checks":["l2_corridor"],"output":{"format":"csv"}}"#
        )
        .is_err());
    }

    #[test]
    fn checks_accept_both_forms() {
        let cfg = parse_config(
            r#"{"command":"verify","checks":["l2_corridor",{"id":"bf_sandwich","params":{"s":1}}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.checks[0].id(), "l2_corridor");
        assert_eq!(cfg.checks[1].params().s, Some(1.0));
    }

    #[test]
    fn job_seed_fills_seeded_presets() {
        let cfg = parse_config(
            r#"{"command":"op","preset":"random_bandlimited","seed":9,"op":{"name":"lift","alpha":1}}"#,
        )
        .unwrap();
        let params = cfg.preset_params("random_bandlimited", &PresetParams::new());
        assert_eq!(params["seed"], 9.0);
        let explicit: PresetParams = [("seed".to_string(), 3.0)].into_iter().collect();
        assert_eq!(
            cfg.preset_params("random_bandlimited", &explicit)["seed"],
            3.0
        );
    }
}
