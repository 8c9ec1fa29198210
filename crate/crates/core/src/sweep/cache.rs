use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct CachedSample {
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Measured samples keyed by `fingerprint/variation/kind/index`, kept as a
/// JSON file next to the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCache {
    version: u32,
    entries: BTreeMap<String, CachedSample>,
}

impl Default for SweepCache {
    fn default() -> Self {
        SweepCache {
            version: CACHE_VERSION,
            entries: BTreeMap::new(),
        }
    }
}

impl SweepCache {
    /// `scene.json` → `scene.json.sweep-cache.json`.
    pub fn sidecar_path(scene_path: &Path) -> PathBuf {
        let mut name = scene_path.file_name().unwrap_or_default().to_os_string();
        name.push(".sweep-cache.json");
        scene_path.with_file_name(name)
    }

    /// Loads a cache, or starts an empty one if the file is missing or was
    /// written by another version.
    pub fn load_or_default(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(e) => return Err(Error::io(path, e)),
        };
        match serde_json::from_str::<SweepCache>(&text) {
            Ok(c) if c.version == CACHE_VERSION => Ok(c),
            _ => Ok(Self::default()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn key(fingerprint: &str, variation: usize, kind: &str, index: usize) -> String {
        format!("{fingerprint}/{variation}/{kind}/{index}")
    }

    pub(crate) fn get(&self, key: &str) -> Option<&CachedSample> {
        self.entries.get(key)
    }

    pub(crate) fn insert(&mut self, key: String, sample: CachedSample) {
        self.entries.insert(key, sample);
    }

    /// Drops entries from other scenes or settings.
    pub(crate) fn retain_fingerprint(&mut self, fingerprint: &str) {
        self.entries.retain(|k, _| k.split('/').next() == Some(fingerprint));
    }
}
