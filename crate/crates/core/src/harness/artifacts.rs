//! Content-addressed cache of trained models.

use std::cell::RefCell;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::sha256_json;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub kind: String,
    pub hash: String,
    pub file: String,
}

/// Models stored as `<kind>-<hash>.json` under one directory, where the
/// hash covers everything that determines the model. A missing model is
/// built on demand unless building is disabled.
#[derive(Debug)]
pub struct ArtifactStore {
    root: PathBuf,
    build: bool,
    records: RefCell<Vec<ArtifactRecord>>,
}

impl ArtifactStore {
    pub fn new(root: impl Into<PathBuf>, build: bool) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            build,
            records: RefCell::new(Vec::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Every artifact looked up so far, in lookup order, without repeats.
    pub fn records(&self) -> Vec<ArtifactRecord> {
        self.records.borrow().clone()
    }

    pub fn key_hash<K: Serialize>(kind: &str, key: &K) -> String {
        sha256_json(&(kind, key))
    }

    /// Loads the artifact for `key`, or builds and stores it.
    pub fn obtain<K, T>(
        &self,
        kind: &str,
        key: &K,
        load: impl FnOnce(&Path) -> Result<T>,
        build: impl FnOnce() -> Result<T>,
        save: impl FnOnce(&T, &Path) -> Result<()>,
    ) -> Result<(T, String)>
    where
        K: Serialize,
    {
        let hash = Self::key_hash(kind, key);
        let file = format!("{kind}-{}.json", &hash[..20]);
        let path = self.root.join(&file);
        let value = if path.exists() {
            load(&path)?
        } else if self.build {
            let value = build()?;
            let tmp = self.root.join(format!("{file}.partial"));
            save(&value, &tmp)?;
            std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
            value
        } else {
            return Err(Error::Config(format!(
                "artifact {file} is missing and building is disabled"
            )));
        };
        let mut records = self.records.borrow_mut();
        if !records.iter().any(|r| r.hash == hash) {
            records.push(ArtifactRecord {
                kind: kind.to_string(),
                hash: hash.clone(),
                file,
            });
        }
        Ok((value, hash))
    }
}
