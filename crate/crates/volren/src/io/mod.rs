//! File formats: raw voxel dumps with plain-text sidecars, transfer-function
//! CSVs, pre-integration tables, and PPM/PFM image export.

pub mod image;
pub mod preint;
pub mod raw;
pub mod report;
pub mod tf;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Sidecar path for a data file: same basename, `.meta` extension.
pub fn meta_path(data_path: &Path) -> PathBuf {
    data_path.with_extension("meta")
}

/// Parsed `key=value` lines; blank lines and `#` comments are skipped.
/// Values keep everything after the first `=`.
#[derive(Debug, Clone, Default)]
pub struct KeyValueFile {
    map: BTreeMap<String, String>,
}

impl KeyValueFile {
    pub fn parse(text: &str) -> KeyValueFile {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        KeyValueFile { map }
    }

    pub fn load(path: &Path) -> Result<KeyValueFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(KeyValueFile::parse(&text))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str, path: &Path) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::format("metadata", path, format!("missing key '{key}'")))
    }
}

/// Parse a comma-separated list of exactly `N` numbers.
pub(crate) fn parse_numbers<const N: usize>(
    text: &str,
    what: &'static str,
    path: &Path,
) -> Result<[f64; N]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(Error::format(
            "metadata",
            path,
            format!("{what} must hold {N} comma-separated values, got '{text}'"),
        ));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|_| Error::format("metadata", path, format!("bad number '{part}' in {what}")))?;
    }
    Ok(out)
}
