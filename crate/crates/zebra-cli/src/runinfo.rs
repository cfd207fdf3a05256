//! `run.json` sidecar: enough to reconstruct an invocation byte-for-byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use zebra_core::dataset::write_json;
use zebra_core::{Error, Result};

#[derive(Serialize)]
pub struct RunInfo {
    command: String,
    version: String,
    args: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    /// SHA-256 digest per input path.
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl RunInfo {
    pub fn new(command: &str) -> Self {
        RunInfo {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            args: BTreeMap::new(),
            seed: None,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn arg(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).expect("serializable arg");
        self.args.insert(key.to_string(), value);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(path.display().to_string(), hex);
        Ok(self)
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Writes the sidecar as `run.json` next to the primary output.
    pub fn write_beside(&self, primary_output: &Path) -> Result<()> {
        let dir = primary_output.parent().unwrap_or_else(|| Path::new("."));
        let path: PathBuf = dir.join("run.json");
        write_json(self, &path)
    }
}
