use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SUMMARY_FILE: &str = "summary.json";
pub const RECORD_FILE: &str = "run.json";

/// Hex SHA-256 of the raw configuration bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub subcommand: String,
    pub config_hash: String,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
}

/// Provenance of one run. `started_at` stays in memory so that the files
/// written for a given config and seed are byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub config_hash: String,
    pub subcommand: String,
    #[serde(skip, default = "epoch")]
    pub started_at: SystemTime,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub seed: u64,
}

fn epoch() -> SystemTime {
    SystemTime::UNIX_EPOCH
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

/// Writes `files` under `dir`, creating it if needed; returns the paths in order.
pub fn write_all(dir: &Path, files: &[(String, String)]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}
