//! Content-addressed result cache. Entries are JSON files named by the
//! SHA-256 of the canonical command and semantic configuration, written
//! through a temporary file and a rename.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const CACHE_DIR_VAR: &str = "GABORLAB_CACHE_DIR";

/// What a command produces: the JSON report and named artifact files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    pub report: String,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub version: String,
    pub created: u64,
    pub report: String,
    /// Artifact name and base64 contents.
    pub artifacts: Vec<(String, String)>,
}

pub fn default_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("gaborlab-cache"))
}

/// Hex SHA-256 of `{"command": .., "config": ..}` serialized with sorted keys.
pub fn cache_key(command: &str, config: &BTreeMap<String, String>) -> String {
    let canonical = serde_json::json!({ "command": command, "config": config });
    let digest = Sha256::digest(canonical.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn entry_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

fn read_entry(path: &Path, key: &str, version: &str) -> Option<Payload> {
    let text = std::fs::read_to_string(path).ok()?;
    let entry: CacheEntry = match serde_json::from_str(&text) {
        Ok(e) => e,
        Err(e) => {
            log::warn!("cache entry {} is corrupt ({e}); recomputing", path.display());
            return None;
        }
    };
    if entry.key != key {
        log::warn!("cache entry {} has a foreign key; recomputing", path.display());
        return None;
    }
    if entry.version != version {
        log::info!("cache entry from version {} ignored (running {version})", entry.version);
        return None;
    }
    let mut artifacts = Vec::with_capacity(entry.artifacts.len());
    for (name, data) in entry.artifacts {
        match STANDARD.decode(data) {
            Ok(bytes) => artifacts.push((name, bytes)),
            Err(e) => {
                log::warn!("cache entry {} is corrupt ({e}); recomputing", path.display());
                return None;
            }
        }
    }
    Some(Payload {
        report: entry.report,
        artifacts,
    })
}

fn write_entry(dir: &Path, key: &str, version: &str, payload: &Payload) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let entry = CacheEntry {
        key: key.to_string(),
        version: version.to_string(),
        created: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        report: payload.report.clone(),
        artifacts: payload
            .artifacts
            .iter()
            .map(|(n, b)| (n.clone(), STANDARD.encode(b)))
            .collect(),
    };
    let nonce = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    let tmp = dir.join(format!(".{key}.{}.{nonce}.tmp", std::process::id()));
    std::fs::write(&tmp, serde_json::to_vec(&entry).expect("plain json"))?;
    std::fs::rename(&tmp, entry_path(dir, key)).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

/// Returns the cached payload when the key and version match, otherwise runs
/// `compute` and stores its result. The flag is true on a hit.
pub fn cache_get_or_compute(
    dir: &Path,
    key: &str,
    version: &str,
    compute: impl FnOnce() -> CliResult<Payload>,
) -> CliResult<(Payload, bool)> {
    let path = entry_path(dir, key);
    if let Some(p) = read_entry(&path, key, version) {
        log::info!("cache hit {key}");
        return Ok((p, true));
    }
    log::info!("cache miss {key}");
    let payload = compute()?;
    if let Err(e) = write_entry(dir, key, version, &payload) {
        log::warn!("could not write cache entry in {}: {e}", dir.display());
    }
    Ok((payload, false))
}

/// Removes every entry of the cache directory.
pub fn clear(dir: &Path) -> CliResult<usize> {
    let mut n = 0;
    let Ok(rd) = std::fs::read_dir(dir) else {
        return Ok(0);
    };
    for e in rd.flatten() {
        if e.path().extension().is_some_and(|x| x == "json") {
            std::fs::remove_file(e.path()).map_err(|err| CliError::validation("io", err.to_string()))?;
            n += 1;
        }
    }
    Ok(n)
}
