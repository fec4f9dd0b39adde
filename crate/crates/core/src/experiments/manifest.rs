//! Experiment manifests: configuration snapshot plus content digests of
//! every output file. Re-running with the same configuration must
//! reproduce all CSV outputs bitwise; the manifest makes that checkable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub name: String,
    pub artifact_version: String,
    pub created: String,
    /// Full effective configuration of the run (flags already merged in).
    pub config: serde_json::Value,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` under `dir/name` and returns its digest entry.
pub fn write_text_file(dir: &Path, name: &str, contents: &str) -> Result<OutputFile> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(OutputFile { path: name.to_string(), sha256: sha256_hex(contents.as_bytes()) })
}

impl ExperimentManifest {
    pub fn new(name: &str, config: serde_json::Value, outputs: Vec<OutputFile>) -> Self {
        ExperimentManifest {
            name: name.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            created: chrono::Utc::now().to_rfc3339(),
            config,
            outputs,
        }
    }

    /// Writes the manifest as `<name>.manifest.json` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.manifest.json", self.name));
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    /// True when every listed output exists under `dir` with a matching
    /// digest (used by `--skip-existing`).
    pub fn outputs_match(&self, dir: &Path) -> bool {
        self.outputs.iter().all(|out| {
            std::fs::read(dir.join(&out.path))
                .map(|bytes| sha256_hex(&bytes) == out.sha256)
                .unwrap_or(false)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
