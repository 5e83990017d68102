use std::path::{Path, PathBuf};

use aeskit_core::embed::{EmbeddingManifest, EmbeddingSet};

use super::{read_bytes, read_json, read_string, write_bytes, write_json};
use crate::error::{CliError, CliResult, Context};

pub const MANIFEST_SUFFIX: &str = ".emb.json";

fn sibling(manifest_path: &Path, name: &str) -> PathBuf {
    manifest_path.parent().unwrap_or(Path::new("")).join(name)
}

/// Load a set from its manifest; payload paths resolve next to the manifest.
pub fn load_embeddings(manifest_path: &Path) -> CliResult<EmbeddingSet> {
    let manifest: EmbeddingManifest = read_json(manifest_path)?;
    manifest.validate().context(manifest_path.display().to_string())?;
    let data = read_bytes(&sibling(manifest_path, &manifest.data_file))?;
    let ids = read_string(&sibling(manifest_path, &manifest.ids_file))?;
    EmbeddingSet::from_bytes(manifest, &data, &ids).context(manifest_path.display().to_string())
}

/// `stem` is a path prefix: writes `<stem>.emb.json`, `.emb.bin`, `.ids.txt`.
pub fn save_embeddings(stem: &Path, set: &EmbeddingSet) -> CliResult<PathBuf> {
    let name = stem
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Usage(format!("invalid output stem {}", stem.display())))?;
    let mut manifest = set.manifest.clone();
    let fresh = EmbeddingManifest::new(&manifest.model_name, manifest.dim, manifest.count, manifest.pooling, name);
    manifest.data_file = fresh.data_file;
    manifest.ids_file = fresh.ids_file;
    let manifest_path = stem.with_file_name(format!("{name}{MANIFEST_SUFFIX}"));
    write_bytes(&sibling(&manifest_path, &manifest.data_file), &set.to_bytes())?;
    write_bytes(&sibling(&manifest_path, &manifest.ids_file), set.ids_text().as_bytes())?;
    write_json(&manifest_path, &manifest)?;
    Ok(manifest_path)
}
