use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineError, Stage};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

impl FileHash {
    pub fn of(file: &Path, name: String) -> Result<Self, PipelineError> {
        let bytes = std::fs::read(file).map_err(|source| PipelineError::Io {
            path: file.to_path_buf(),
            source,
        })?;
        Ok(FileHash {
            path: name,
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// One manifest line per stage run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub stage: String,
    pub inputs: Vec<FileHash>,
    pub config_hash: String,
    pub outputs: Vec<FileHash>,
    pub timestamp: String,
}

pub fn read_manifest(out_dir: &Path) -> Result<Vec<ManifestEntry>, PipelineError> {
    let path = out_dir.join(MANIFEST_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(PipelineError::Io { path, source }),
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l)
                .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
        })
        .collect()
}

/// Replaces the line for `entry.stage`, keeping lines in stage order.
pub(super) fn record(out_dir: &Path, entry: ManifestEntry) -> Result<(), PipelineError> {
    let mut entries = read_manifest(out_dir)?;
    entries.retain(|e| e.stage != entry.stage);
    entries.push(entry);
    let rank = |e: &ManifestEntry| e.stage.parse::<Stage>().map_or(usize::MAX, |s| s as usize);
    entries.sort_by_key(rank);
    let mut text = String::new();
    for e in &entries {
        text.push_str(&serde_json::to_string(e).expect("manifest entry serializes"));
        text.push('\n');
    }
    let path = out_dir.join(MANIFEST_FILE);
    std::fs::write(&path, text).map_err(|source| PipelineError::Io { path, source })
}
