//! Content-addressed on-disk store for per-mode spectra.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EigenRecord, Eigenvector, ModeGrid, Provenance};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub model_hash: String,
    pub h: f64,
    pub k: i64,
    /// Grid size, `0` for closed-form spectra.
    pub n: usize,
    pub e_max: f64,
}

impl CacheKey {
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.model_hash.as_bytes());
        hasher.update(self.h.to_bits().to_le_bytes());
        hasher.update(self.k.to_le_bytes());
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update(self.e_max.to_bits().to_le_bytes());
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    energy: f64,
    index: usize,
    provenance: Provenance,
    vector: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheFile {
    key: CacheKey,
    grid: Option<ModeGrid>,
    entries: Vec<Entry>,
}

#[derive(Debug, Clone)]
pub struct SpectrumCache {
    root: PathBuf,
}

impl SpectrumCache {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(root.as_ref())?;
        Ok(Self {
            root: root.as_ref().to_path_buf(),
        })
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.root.join(format!("{}.json", key.digest()))
    }

    /// Returns the stored records, or `None` on a miss or key mismatch.
    /// Analytic eigenvectors are not stored; they come back as `Unavailable`.
    pub fn load(&self, key: &CacheKey) -> Result<Option<Vec<EigenRecord>>> {
        let path = self.path(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let file: CacheFile = match serde_json::from_slice(&bytes) {
            Ok(f) => f,
            Err(_) => return Ok(None),
        };
        if file.key != *key {
            return Ok(None);
        }
        Ok(Some(
            file.entries
                .into_iter()
                .map(|e| EigenRecord {
                    energy: e.energy,
                    k: key.k,
                    h: key.h,
                    index: e.index,
                    provenance: e.provenance,
                    grid: file.grid,
                    vector: e
                        .vector
                        .map_or(Eigenvector::Unavailable, Eigenvector::Sampled),
                })
                .collect(),
        ))
    }

    pub fn store(&self, key: &CacheKey, records: &[EigenRecord]) -> Result<()> {
        let file = CacheFile {
            key: key.clone(),
            grid: records.iter().find_map(|r| r.grid),
            entries: records
                .iter()
                .map(|r| Entry {
                    energy: r.energy,
                    index: r.index,
                    provenance: r.provenance,
                    vector: match &r.vector {
                        Eigenvector::Sampled(u) => Some(u.clone()),
                        _ => None,
                    },
                })
                .collect(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)?;
        tmp.write_all(&serde_json::to_vec(&file)?)?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn get_or_compute<F>(&self, key: &CacheKey, compute: F) -> Result<Vec<EigenRecord>>
    where
        F: FnOnce() -> Result<Vec<EigenRecord>>,
    {
        if let Some(hit) = self.load(key)? {
            return Ok(hit);
        }
        let records = compute()?;
        self.store(key, &records)?;
        Ok(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_model;
    use crate::modespec::{assemble_mode_operator, solve_modes};

    #[test]
    fn roundtrip_and_key_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::open(dir.path()).unwrap();
        let model = builtin_model("sphere").unwrap();
        let grid = ModeGrid::new(&model, 64).unwrap();
        let op = assemble_mode_operator(&model, 1, 0.5, &grid).unwrap();
        let recs = solve_modes(&op, 3.0).unwrap();
        let key = CacheKey {
            model_hash: model.content_hash(),
            h: 0.5,
            k: 1,
            n: 64,
            e_max: 3.0,
        };
        assert!(cache.load(&key).unwrap().is_none());
        cache.store(&key, &recs).unwrap();
        assert_eq!(cache.load(&key).unwrap().unwrap(), recs);
        let other = CacheKey {
            k: 2,
            ..key.clone()
        };
        assert!(cache.load(&other).unwrap().is_none());
        let mut calls = 0;
        let again = cache
            .get_or_compute(&key, || {
                calls += 1;
                Ok(vec![])
            })
            .unwrap();
        assert_eq!(calls, 0);
        assert_eq!(again.len(), recs.len());
    }
}
