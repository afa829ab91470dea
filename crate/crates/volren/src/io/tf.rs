//! Transfer function CSV: one row per lookup entry, four float columns
//! `r,g,b,a`, each in `[0, 1]`. The row count defines the table length.

use std::path::Path;

use volren_core::transfer::TransferFunction;

use crate::error::{Error, Result};

pub fn load_transfer_csv(path: &Path, d_ref: f64) -> Result<TransferFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(Error::format(
                "transfer function",
                path,
                format!("line {}: expected 4 columns, got {}", lineno + 1, cols.len()),
            ));
        }
        let mut entry = [0.0f64; 4];
        for (slot, col) in entry.iter_mut().zip(&cols) {
            *slot = col.parse().map_err(|_| {
                Error::format(
                    "transfer function",
                    path,
                    format!("line {}: bad number '{col}'", lineno + 1),
                )
            })?;
        }
        entries.push(entry);
    }
    Ok(TransferFunction::new(entries, d_ref)?)
}

pub fn save_transfer_csv(tf: &TransferFunction, path: &Path) -> Result<()> {
    let mut text = String::new();
    for e in tf.entries() {
        text.push_str(&format!("{},{},{},{}\n", e[0], e[1], e[2], e[3]));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
