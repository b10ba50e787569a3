//! `manifest.json`: what was run, with which settings, and what it wrote.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::io::{read_json, write_json};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved configuration of the run.
    pub config: Value,
    pub base_seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
    /// Command-specific metadata (per-cell seeds, truth values, …).
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, base_seed: u64) -> Result<Self> {
        Ok(RunManifest {
            command: command.into(),
            config: serde_json::to_value(config).map_err(|e| crate::Error::Input(e.to_string()))?,
            base_seed,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: Vec::new(),
            duration_secs: 0.0,
            extra: Value::Null,
        })
    }

    /// Decodes the stored configuration.
    pub fn config_as<C: for<'de> Deserialize<'de>>(&self) -> Result<C> {
        serde_json::from_value(self.config.clone()).map_err(|e| crate::Error::Input(format!("manifest config: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }
}
