//! Versioned run configuration shared by the flag interface and `run --config`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Lie,
    Kernel,
    Group,
    Dispersive,
    Nls,
    VerifyAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GroupOp {
    Orbit,
    Poincare,
    Delta,
    Growth,
    Autokernel,
    Lqnorm,
}

/// Numeric parameters; each command reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub t_list: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub grid_n: Option<usize>,
    pub op: Option<GroupOp>,
    pub budget: Option<usize>,
    pub radius: Option<f64>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub samples: Option<usize>,
    /// `a:b:steps`.
    pub t_range: Option<String>,
    pub fit: bool,
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    /// `p,q;p~,q~`.
    pub pairs: Option<String>,
    /// `key=value` overrides applied to the verification settings.
    pub overrides: Vec<String>,
    pub checks: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    #[serde(default)]
    pub space: Option<String>,
    #[serde(default)]
    pub group: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            space: None,
            group: None,
            params: Params::default(),
            outputs: Outputs::default(),
            seed: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Usage(format!(
                "config line {} column {}, field `{path}`: {inner}",
                inner.line(),
                inner.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "field `schema_version`: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        if let Some(g) = &self.group {
            if !g.is_file() {
                return Err(CliError::Usage(format!("field `group`: file {} does not exist", g.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::parse(r#"{"schema_version": 1, "command": "verify-all"}"#).unwrap();
        assert_eq!(cfg.command, Command::VerifyAll);
        assert_eq!(cfg.params, Params::default());
    }

    #[test]
    fn unknown_fields_name_their_path() {
        let err = RunConfig::parse(r#"{"schema_version": 1, "command": "kernel", "params": {"qq": 4}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("params") && msg.contains("qq"), "{msg}");
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn schema_version_is_checked() {
        let err = RunConfig::parse(r#"{"schema_version": 2, "command": "lie"}"#).unwrap_err();
        assert!(err.to_string().contains("schema_version"));
    }

    #[test]
    fn missing_group_file_is_reported() {
        let err = RunConfig::parse(r#"{"schema_version": 1, "command": "group", "group": "/nonexistent/g.json"}"#).unwrap_err();
        assert!(err.to_string().contains("does not exist"));
    }
}
