//! Run manifest: config echo, artifact checksums, status. Written on every
//! run, including failed ones.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct ErrorEntry {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
    pub artifacts: Vec<ArtifactEntry>,
    pub wall_time_s: f64,
    pub version: &'static str,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

impl RunManifest {
    pub fn build(
        config: &ExperimentConfig,
        outcome: &std::result::Result<Vec<PathBuf>, &CliError>,
        wall_time_s: f64,
    ) -> Result<Self> {
        let mut artifacts = Vec::new();
        if let Ok(paths) = outcome {
            for p in paths {
                let bytes = std::fs::read(p)?;
                artifacts.push(ArtifactEntry {
                    file: p
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    sha256: sha256_hex(&bytes),
                    bytes: bytes.len() as u64,
                });
            }
        }
        Ok(RunManifest {
            command: config.command.name(),
            params: config.params.clone(),
            seed: config.seed,
            status: if outcome.is_ok() { "ok" } else { "error" },
            error: outcome.as_ref().err().map(|e| ErrorEntry {
                code: e.code(),
                message: e.to_string(),
            }),
            artifacts,
            wall_time_s,
            version: env!("CARGO_PKG_VERSION"),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Config(format!("manifest serialization failed: {e}")))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
