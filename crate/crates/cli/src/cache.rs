//! JSON sidecar caching oracle values between runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    /// `None` when the oracle value is not finite.
    pub value: Option<f64>,
    /// `None` when the asymptotic variance is unavailable.
    pub variance: Option<f64>,
    pub variance_note: Option<NoteCode>,
}

/// Why a theoretical variance is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoteCode {
    NormalityViolated,
    VarianceDiverges,
    OracleFailed,
}

#[derive(Debug, Default)]
pub struct OracleCache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, OracleEntry>,
    dirty: bool,
}

impl OracleCache {
    /// Loads the sidecar if it exists; a missing file is an empty cache.
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let entries = match path {
            Some(p) if p.exists() => serde_json::from_str(&std::fs::read_to_string(p)?)?,
            _ => BTreeMap::new(),
        };
        Ok(Self {
            path: path.map(Path::to_path_buf),
            entries,
            dirty: false,
        })
    }

    pub fn key(distribution: &str, measure: &str, alpha: f64) -> String {
        format!("{distribution}|{measure}|{alpha}")
    }

    pub fn get_or_insert_with<F: FnOnce() -> OracleEntry>(&mut self, key: String, compute: F) -> OracleEntry {
        if let Some(e) = self.entries.get(&key) {
            return *e;
        }
        let e = compute();
        self.entries.insert(key, e);
        self.dirty = true;
        e
    }

    pub fn save(&mut self) -> Result<()> {
        if let (Some(p), true) = (&self.path, self.dirty) {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, serde_json::to_string_pretty(&self.entries)? + "\n")?;
            self.dirty = false;
        }
        Ok(())
    }
}
