//! On-disk result cache: one JSON record per (command, key hash).
//!
//! Records are written to a temporary file in the cache directory and
//! renamed into place, so readers never see a partial record.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use qng_core::opt::ThresholdResult;
use qng_core::thresholds::ThresholdCache;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const CACHE_ENV: &str = "QNG_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".qng-cache";
const RECORD_VERSION: u32 = 1;

pub fn hash_key(key: &str) -> String {
    format!("{:x}", Sha256::digest(key.as_bytes()))
}

#[derive(Serialize, Deserialize)]
struct Record<T> {
    schema_version: u32,
    key: String,
    value: T,
}

#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    writes: Mutex<()>,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            writes: Mutex::new(()),
        }
    }

    /// Directory from `explicit`, else `$QNG_CACHE_DIR`, else `.qng-cache`.
    pub fn resolve(explicit: Option<&Path>) -> Self {
        let dir = explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        Self::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, command: &str, key: &str) -> PathBuf {
        self.dir.join(format!("{command}-{}.json", hash_key(key)))
    }

    /// Stored value, or `None` when absent, unreadable or recorded under a
    /// different key.
    pub fn load<T: DeserializeOwned>(&self, command: &str, key: &str) -> Option<T> {
        let text = fs::read_to_string(self.path_for(command, key)).ok()?;
        let record: Record<T> = serde_json::from_str(&text).ok()?;
        (record.schema_version == RECORD_VERSION && record.key == key).then_some(record.value)
    }

    pub fn store<T: Serialize>(&self, command: &str, key: &str, value: &T) -> Result<()> {
        let record = Record {
            schema_version: RECORD_VERSION,
            key: key.to_owned(),
            value,
        };
        let text = serde_json::to_string(&record)?;
        let _guard = self.writes.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let target = self.path_for(command, key);
        let mut tmp =
            tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        tmp.write_all(text.as_bytes())
            .map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(&target)
            .map_err(|e| CliError::io(&target, e.error))?;
        Ok(())
    }
}

impl ThresholdCache for DiskCache {
    fn get(&self, key: &str) -> Option<ThresholdResult> {
        self.load("threshold", key)
    }

    fn put(&self, key: &str, value: &ThresholdResult) {
        // a failed write only costs a recomputation later
        let _ = self.store("threshold", key, value);
    }
}
