//! Run manifests: what was run, on which bytes, producing which bytes.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Command;
use crate::error::{read_text, write_text, CliError, CliResult};

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Parsed arguments; `rerun` replays exactly these.
    pub args: Command,
    /// Working directory the relative paths in `args` are resolved against.
    pub cwd: PathBuf,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seed: Option<u64>,
    pub config_sha256: Option<String>,
    pub started_at: String,
    pub finished_at: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(role: &str, path: &Path) -> CliResult<FileDigest> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(FileDigest {
        role: role.to_owned(),
        path: path.to_owned(),
        sha256: sha256_hex(&bytes),
    })
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// `<output>.manifest.json`, next to the primary output.
pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output.as_os_str().to_owned();
    name.push(MANIFEST_SUFFIX);
    PathBuf::from(name)
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        write_text(path, &text)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::in_file(path, e))
    }

    /// Seed recorded next to `output`, if a manifest exists there.
    pub fn sibling_seed(output: &Path) -> Option<u64> {
        let path = manifest_path(output);
        path.exists()
            .then(|| Self::read(&path).ok())
            .flatten()
            .and_then(|m| m.seed)
    }
}
