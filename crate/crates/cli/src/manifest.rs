//! Run manifests: what was run, with which settings, and digests of what it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// File name, relative to the manifest's directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub files: Vec<FileDigest>,
}

pub fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects output files for one command and writes the manifest last.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    manifest: RunManifest,
}

impl OutputSet {
    pub fn new(dir: impl Into<PathBuf>, command: &str, config: Value, seed: Option<u64>) -> Self {
        OutputSet {
            dir: dir.into(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                config,
                seed,
                started_unix_ms: unix_ms(),
                finished_unix_ms: 0,
                files: Vec::new(),
            },
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `contents` to `name` inside the output directory and records its digest.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        if !self.dir.as_os_str().is_empty() {
            fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        }
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.manifest.files.retain(|f| f.path != name);
        self.manifest.files.push(FileDigest {
            path: name.to_string(),
            bytes: contents.len() as u64,
            sha256: sha256_hex(contents),
        });
        Ok(path)
    }

    pub fn files(&self) -> &[FileDigest] {
        &self.manifest.files
    }

    /// Stamps the finish time and writes the manifest as `name`.
    pub fn finish(mut self, name: &str) -> Result<(PathBuf, RunManifest)> {
        self.manifest.finished_unix_ms = unix_ms();
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok((path, self.manifest))
    }
}

/// Re-hashes every file listed in the manifest at `path`. Returns the names
/// whose digest or size no longer matches.
pub fn check_manifest(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Check(format!("{}: malformed manifest: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut bad = Vec::new();
    for f in &manifest.files {
        let file = dir.join(&f.path);
        let bytes = fs::read(&file).map_err(|e| CliError::io(&file, e))?;
        if bytes.len() as u64 != f.bytes || sha256_hex(&bytes) != f.sha256 {
            bad.push(f.path.clone());
        }
    }
    Ok(bad)
}
