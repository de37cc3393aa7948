//! Snapshot manifests: one JSON file per snapshot listing the document
//! files, the collection id, and the snapshot date.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{parse_document_with_key, serialize_document, CorpusError, Snapshot};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub collection_id: String,
    pub date: NaiveDate,
    /// Document file paths, relative to the manifest file.
    pub documents: Vec<String>,
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Loads the snapshot described by a manifest file.
pub fn load_snapshot(manifest_path: &Path) -> Result<Snapshot, CorpusError> {
    let raw = fs::read_to_string(manifest_path).map_err(|e| io_err(manifest_path, e))?;
    let manifest: SnapshotManifest = serde_json::from_str(&raw)
        .map_err(|e| CorpusError::Manifest(format!("{}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut documents = Vec::with_capacity(manifest.documents.len());
    for rel in &manifest.documents {
        let path = base.join(rel);
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("doc")
            .to_string();
        let tree = parse_document_with_key(&bytes, &stem).map_err(|e| match e {
            CorpusError::Parse { offset, message } => CorpusError::Parse {
                offset,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
        documents.push(tree);
    }
    Snapshot::new(manifest.collection_id, manifest.date, documents)
}

/// Loads a series of snapshots and validates that dates strictly increase
/// and all snapshots share one collection id.
pub fn load_series(manifest_paths: &[PathBuf]) -> Result<Vec<Snapshot>, CorpusError> {
    let mut out: Vec<Snapshot> = Vec::with_capacity(manifest_paths.len());
    for path in manifest_paths {
        let snap = load_snapshot(path)?;
        if let Some(prev) = out.last() {
            if snap.date <= prev.date {
                return Err(CorpusError::Manifest(format!(
                    "snapshot dates must strictly increase: {} after {}",
                    snap.date, prev.date
                )));
            }
            if snap.collection_id != prev.collection_id {
                return Err(CorpusError::Manifest(format!(
                    "collection id changed mid-series: {} vs {}",
                    snap.collection_id, prev.collection_id
                )));
            }
        }
        out.push(snap);
    }
    Ok(out)
}

/// Writes a snapshot as canonical XML files plus a manifest, returning the
/// manifest path. Files land in `dir`, one per document.
pub fn write_snapshot(snapshot: &Snapshot, dir: &Path) -> Result<PathBuf, CorpusError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::new();
    for doc in &snapshot.documents {
        let file = format!("{}.xml", sanitize(doc.doc_key()));
        let path = dir.join(&file);
        fs::write(&path, serialize_document(doc)).map_err(|e| io_err(&path, e))?;
        files.push(file);
    }
    let manifest = SnapshotManifest {
        collection_id: snapshot.collection_id.clone(),
        date: snapshot.date,
        documents: files,
    };
    let path = dir.join(format!("{}.manifest.json", snapshot.date));
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CorpusError::Manifest(e.to_string()))?;
    fs::write(&path, body + "\n").map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn sanitize(key: &str) -> String {
    key.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
