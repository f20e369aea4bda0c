//! Data sources: a single dataset reshuffled per iteration, or one file per
//! iteration listed in a manifest (benchmark suites ship per-realisation
//! files; both conventions are supported without guessing which one a
//! source uses).

use super::{load_csv_dataset, CsvSchema, Dataset};
use crate::error::{Error, Result};
use serde::Deserialize;
use std::path::Path;

/// Where iteration datasets come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// One dataset; every iteration is a fresh seeded shuffle of it.
    Single(Dataset),
    /// One dataset per iteration, in manifest order.
    PerIteration(Vec<Dataset>),
}

impl DataSource {
    pub fn dataset(&self, iteration: usize) -> &Dataset {
        match self {
            DataSource::Single(ds) => ds,
            DataSource::PerIteration(sets) => &sets[iteration % sets.len()],
        }
    }

    pub fn n_datasets(&self) -> usize {
        match self {
            DataSource::Single(_) => 1,
            DataSource::PerIteration(sets) => sets.len(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    version: u32,
    #[serde(default)]
    schema: Option<CsvSchema>,
    files: Vec<String>,
}

/// Loads a TOML manifest listing one CSV per iteration. Relative paths are
/// resolved against the manifest's directory. An absent `[schema]` table
/// falls back to the IHDP-style default layout.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DataSource> {
    let p = path.as_ref();
    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?;
    let manifest: ManifestFile = toml::from_str(&text)
        .map_err(|e| Error::invalid(format!("bad manifest {}: {e}", p.display())))?;
    if manifest.version != 1 {
        return Err(Error::invalid(format!(
            "unsupported manifest version {} (expected 1)",
            manifest.version
        )));
    }
    if manifest.files.is_empty() {
        return Err(Error::invalid("manifest lists no files"));
    }
    let schema = manifest.schema.unwrap_or_default();
    let base = p.parent().unwrap_or_else(|| Path::new("."));
    let mut sets = Vec::with_capacity(manifest.files.len());
    for f in &manifest.files {
        let fp = base.join(f);
        sets.push(load_csv_dataset(&fp, &schema)?);
    }
    Ok(DataSource::PerIteration(sets))
}
