//! Run manifest: config echo, config hash, crate version, and a content
//! hash for every artifact in the run directory. Deterministic byte-for-byte
//! given the same inputs (sorted file map, no timestamps).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use partscape::error::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::stages::files;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub files: BTreeMap<String, String>,
    pub error: Option<StageError>,
}

impl Manifest {
    /// Hashes every file currently in the run directory (except the manifest
    /// itself).
    pub fn collect(
        cfg: &RunConfig,
        run_dir: &Path,
        error: Option<(&'static str, String)>,
    ) -> Result<Manifest> {
        let mut file_map = BTreeMap::new();
        let mut paths = Vec::new();
        walk(run_dir, run_dir, &mut paths)?;
        paths.sort();
        for rel in paths {
            if rel == files::MANIFEST {
                continue;
            }
            let bytes = fs::read(run_dir.join(&rel))?;
            file_map.insert(rel, sha256_hex(&bytes));
        }
        let config = cfg
            .canonical_lines()
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Ok(Manifest {
            config_hash: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            files: file_map,
            error: error.map(|(stage, message)| StageError {
                stage: stage.to_string(),
                message,
            }),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            partscape::Error::Input(format!("bad manifest {}: {e}", path.display()))
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else {
            out.push(
                path.strip_prefix(root)
                    .expect("children live under the root")
                    .to_string_lossy()
                    .into_owned(),
            );
        }
    }
    Ok(())
}
