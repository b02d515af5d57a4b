//! On-disk result cache.
//!
//! Entries live under `$NILCERT_CACHE_DIR` (default
//! `$XDG_CACHE_HOME/nilcert`, then `$HOME/.cache/nilcert`, then
//! `.nilcert-cache` in the working directory). An entry is keyed by the
//! SHA-256 of its descriptor together with [`ALGORITHM_VERSION`], so a
//! change in the algorithms invalidates old entries. Certificates are
//! stored once, under the SHA-256 of their JSON. Every file is written to
//! a temporary name in the same directory and renamed into place.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::certificate::Certificate;

pub const CACHE_ENV: &str = "NILCERT_CACHE_DIR";

/// Bump when any cached output could change.
pub const ALGORITHM_VERSION: &str = "nilcert-alg-1";

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub tool_version: String,
    pub descriptor: Value,
    pub rank: Option<usize>,
    pub nullspace_dimension: Option<usize>,
    /// Content hashes of certificates stored alongside.
    pub certificates: Vec<String>,
    pub result: Value,
}

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

pub fn default_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(d).join("nilcert");
    }
    if let Some(h) = std::env::var_os("HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(h).join(".cache").join("nilcert");
    }
    PathBuf::from(".nilcert-cache")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Key of a descriptor: objects serialize with sorted keys, so equal
/// descriptors give equal bytes.
pub fn key_of(descriptor: &Value) -> String {
    let v = json!({ "algorithm_version": ALGORITHM_VERSION, "descriptor": descriptor });
    sha256_hex(v.to_string().as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    write_atomic(path, bytes)
}

impl Cache {
    pub fn at(root: impl Into<PathBuf>) -> Cache {
        Cache { root: root.into() }
    }

    pub fn from_env() -> Cache {
        Cache::at(default_dir())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.root.join("entries").join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn certificate_path(&self, hash: &str) -> PathBuf {
        self.root.join("certificates").join(format!("{hash}.json"))
    }

    /// A stored entry for `descriptor`. Unreadable, mismatched or dangling
    /// entries count as misses.
    pub fn load(&self, descriptor: &Value) -> Option<CacheEntry> {
        let key = key_of(descriptor);
        let text = fs::read_to_string(self.entry_path(&key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        if entry.key != key || entry.descriptor != *descriptor {
            return None;
        }
        if !entry.certificates.iter().all(|h| self.certificate_path(h).is_file()) {
            return None;
        }
        Some(entry)
    }

    pub fn store(&self, entry: &CacheEntry) -> io::Result<()> {
        let text = serde_json::to_string(entry).map_err(io::Error::other)?;
        write_atomic(&self.entry_path(&entry.key), text.as_bytes())
    }

    /// Stores a certificate under its content hash and returns the hash.
    pub fn store_certificate(&self, cert: &Certificate) -> io::Result<String> {
        let text = cert.to_json_string();
        let hash = sha256_hex(text.as_bytes());
        let path = self.certificate_path(&hash);
        if !path.is_file() {
            write_atomic(&path, text.as_bytes())?;
        }
        Ok(hash)
    }

    pub fn load_certificate(&self, hash: &str) -> Option<Certificate> {
        let text = fs::read_to_string(self.certificate_path(hash)).ok()?;
        if sha256_hex(text.as_bytes()) != hash {
            return None;
        }
        Certificate::from_json_str(&text).ok()
    }
}

impl CacheEntry {
    pub fn new(descriptor: Value, result: Value) -> CacheEntry {
        CacheEntry {
            key: key_of(&descriptor),
            tool_version: TOOL_VERSION.to_string(),
            descriptor,
            rank: None,
            nullspace_dimension: None,
            certificates: Vec::new(),
            result,
        }
    }
}
