//! Pre-integration table export: raw `f32le` dump of the premultiplied
//! RGBA entries (start value fastest) plus a `.meta` sidecar carrying the
//! resolution and base segment length.

use std::path::Path;

use volren_core::transfer::PreintegrationTable;

use super::{meta_path, KeyValueFile};
use crate::error::{Error, Result};

pub const KIND_PREINTEGRATION: &str = "preintegration";

pub fn save_preintegration_table(table: &PreintegrationTable, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(table.entries().len() * 16);
    for e in table.entries() {
        for c in e {
            bytes.extend_from_slice(&(*c as f32).to_le_bytes());
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let mpath = meta_path(path);
    let text = format!(
        "kind={KIND_PREINTEGRATION}\nresolution={}\nd_base={}\n",
        table.resolution(),
        table.d_base()
    );
    std::fs::write(&mpath, text).map_err(|e| Error::io(&mpath, e))
}

pub fn load_preintegration_table(path: &Path) -> Result<PreintegrationTable> {
    let mpath = meta_path(path);
    let kv = KeyValueFile::load(&mpath)?;
    if kv.get("kind") != Some(KIND_PREINTEGRATION) {
        return Err(Error::format(
            "metadata",
            &mpath,
            format!("expected kind={KIND_PREINTEGRATION}"),
        ));
    }
    let resolution: usize = kv
        .require("resolution", &mpath)?
        .parse()
        .map_err(|_| Error::format("metadata", &mpath, "bad resolution"))?;
    let d_base: f64 = kv
        .require("d_base", &mpath)?
        .parse()
        .map_err(|_| Error::format("metadata", &mpath, "bad d_base"))?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = resolution * resolution * 16;
    if bytes.len() != expected {
        return Err(Error::format(
            "pre-integration table",
            path,
            format!("file is {} bytes, expected {expected}", bytes.len()),
        ));
    }
    let entries: Vec<[f64; 4]> = bytes
        .chunks_exact(16)
        .map(|rec| {
            let mut e = [0.0f64; 4];
            for (c, chunk) in e.iter_mut().zip(rec.chunks_exact(4)) {
                *c = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64;
            }
            e
        })
        .collect();
    Ok(PreintegrationTable::from_entries(resolution, d_base, entries)?)
}
