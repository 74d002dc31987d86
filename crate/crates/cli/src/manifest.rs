//! Per-directory record of how the outputs were produced.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::CmdResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, enough to re-run the command.
    pub argv: Vec<String>,
    /// Effective settings after defaults and environment fallbacks.
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
}

pub fn digest_bytes(path: &Path, bytes: &[u8]) -> InputDigest {
    InputDigest { path: path.to_path_buf(), sha256: format!("{:x}", Sha256::digest(bytes)), bytes: bytes.len() as u64 }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Accumulates inputs and outputs while a command runs.
pub struct Recorder {
    manifest: RunManifest,
    out_dir: PathBuf,
}

impl Recorder {
    pub fn new(command: &str, out_dir: &Path, config: impl Serialize) -> CmdResult<Self> {
        let config = serde_json::to_value(config).map_err(clr_spca::Error::from)?;
        Ok(Self {
            manifest: RunManifest {
                command: command.to_string(),
                argv: std::env::args().collect(),
                config,
                seeds: BTreeMap::new(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                started_at: now(),
                finished_at: String::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
            out_dir: out_dir.to_path_buf(),
        })
    }

    pub fn set_config(&mut self, config: impl Serialize) -> CmdResult<()> {
        self.manifest.config = serde_json::to_value(config).map_err(clr_spca::Error::from)?;
        Ok(())
    }

    pub fn input(&mut self, digest: InputDigest) {
        self.manifest.inputs.push(digest);
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.manifest.seeds.insert(name.to_string(), value);
    }

    /// Writes `bytes` atomically to `name` inside the output directory.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CmdResult<()> {
        clr_spca::io::atomic_write(&self.out_dir.join(name), bytes)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> CmdResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(clr_spca::Error::from)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(mut self) -> CmdResult<()> {
        self.manifest.finished_at = now();
        let path = self.out_dir.join(MANIFEST_FILE);
        clr_spca::io::write_json(&path, &self.manifest)?;
        Ok(())
    }
}
