use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to every output file as
/// `<out>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub tolerance_profile: String,
    pub duration_seconds: f64,
    /// Output path to lowercase hex SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>, threads: usize, profile: &str) -> Self {
        Self {
            command: command.to_string(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            threads,
            tolerance_profile: profile.to_string(),
            duration_seconds: 0.0,
            outputs: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, out: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(Self::path_for(out), text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(RunManifest::path_for(Path::new("out/series.csv")), PathBuf::from("out/series.csv.manifest.json"));
    }
}
