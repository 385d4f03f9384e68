use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Provenance for one command invocation; written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub config_sha256: String,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputFile>,
    /// Command-specific facts (derived parameters, summary numbers).
    pub details: BTreeMap<String, toml::Value>,
    /// The effective configuration, verbatim.
    pub config: String,
}

pub struct ManifestBuilder {
    command: String,
    started: Instant,
    outputs: Vec<PathBuf>,
    details: BTreeMap<String, toml::Value>,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), started: Instant::now(), outputs: Vec::new(), details: BTreeMap::new() }
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    pub fn detail(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub fn write(self, dir: &Path, config: &RunConfig) -> anyhow::Result<PathBuf> {
        let config_text = config.to_toml();
        let mut outputs = Vec::with_capacity(self.outputs.len());
        for p in &self.outputs {
            let bytes = std::fs::read(p)?;
            let rel = p.strip_prefix(dir).unwrap_or(p);
            outputs.push(OutputFile { path: rel.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        }
        let manifest = RunManifest {
            command: self.command,
            args: std::env::args().skip(1).collect(),
            seed: config.seed(),
            versions: BTreeMap::from([
                ("dts-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
                ("dts-core".to_string(), dts_core::VERSION.to_string()),
            ]),
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            outputs,
            details: self.details,
            config: config_text,
        };
        let path = dir.join(MANIFEST_NAME);
        std::fs::write(&path, toml::to_string(&manifest)?)?;
        Ok(path)
    }
}
