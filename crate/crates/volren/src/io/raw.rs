//! Raw voxel volumes: headerless little-endian sample dumps described by a
//! plain-text `.meta` sidecar (dims, spacing, dtype, normalization range).
//! Coefficient volumes reuse the same container with `kind=coefficients`
//! and are not normalized or clamped on load.

use std::path::Path;

use volren_core::interp::CoefficientVolume;
use volren_core::volume::{decode_raw, encode_raw, encoded_meta, Dtype, ScalarVolume, VolumeMeta};

use super::{meta_path, parse_numbers, KeyValueFile};
use crate::error::{Error, Result};

pub const KIND_VOLUME: &str = "volume";
pub const KIND_COEFFICIENTS: &str = "coefficients";

fn format_triplet(v: (f64, f64, f64)) -> String {
    format!("{},{},{}", v.0, v.1, v.2)
}

fn meta_text(meta: &VolumeMeta, kind: &str) -> String {
    format!(
        "dims={},{},{}\nspacing={}\ndtype={}\nvmin={}\nvmax={}\nkind={kind}\n",
        meta.dims.0,
        meta.dims.1,
        meta.dims.2,
        format_triplet(meta.spacing),
        meta.dtype.name(),
        meta.vmin,
        meta.vmax,
    )
}

/// Read a `.meta` sidecar into a [`VolumeMeta`] plus the stored kind.
pub fn read_meta(data_path: &Path) -> Result<(VolumeMeta, String)> {
    read_meta_file(&meta_path(data_path))
}

/// Parse a sidecar file given its own path.
pub fn read_meta_file(mpath: &Path) -> Result<(VolumeMeta, String)> {
    let mpath = mpath.to_path_buf();
    let kv = KeyValueFile::load(&mpath)?;
    let dims = parse_numbers::<3>(kv.require("dims", &mpath)?, "dims", &mpath)?;
    let spacing = parse_numbers::<3>(kv.require("spacing", &mpath)?, "spacing", &mpath)?;
    let dtype = Dtype::parse(kv.require("dtype", &mpath)?).map_err(Error::Core)?;
    let vmin: f64 = kv
        .require("vmin", &mpath)?
        .parse()
        .map_err(|_| Error::format("metadata", &mpath, "bad vmin"))?;
    let vmax: f64 = kv
        .require("vmax", &mpath)?
        .parse()
        .map_err(|_| Error::format("metadata", &mpath, "bad vmax"))?;
    let kind = kv.get("kind").unwrap_or(KIND_VOLUME).to_string();
    let meta = VolumeMeta {
        dims: (dims[0] as usize, dims[1] as usize, dims[2] as usize),
        spacing: (spacing[0], spacing[1], spacing[2]),
        dtype,
        vmin,
        vmax,
    };
    Ok((meta, kind))
}

/// Load a raw volume described by an explicit meta record.
pub fn load_raw_volume(path: &Path, meta: &VolumeMeta) -> Result<ScalarVolume> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_raw(meta, &bytes)?)
}

/// Load a raw volume using its `.meta` sidecar.
pub fn load_raw_volume_auto(path: &Path) -> Result<ScalarVolume> {
    let (meta, kind) = read_meta(path)?;
    if kind == KIND_COEFFICIENTS {
        return Err(Error::format(
            "metadata",
            path,
            "file holds spline coefficients, not a scalar volume",
        ));
    }
    load_raw_volume(path, &meta)
}

/// Write the flat little-endian dump plus its `.meta` sidecar.
pub fn save_raw_volume(vol: &ScalarVolume, path: &Path, dtype: Dtype) -> Result<VolumeMeta> {
    let bytes = encode_raw(vol, dtype);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = encoded_meta(vol, dtype);
    let mpath = meta_path(path);
    std::fs::write(&mpath, meta_text(&meta, KIND_VOLUME)).map_err(|e| Error::io(&mpath, e))?;
    Ok(meta)
}

/// Dump spline coefficients bit-exactly as `f32le` with a
/// `kind=coefficients` sidecar.
pub fn save_coefficients(coeffs: &CoefficientVolume, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(coeffs.data().len() * 4);
    for &v in coeffs.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = VolumeMeta {
        dims: coeffs.dims(),
        spacing: coeffs.spacing(),
        dtype: Dtype::F32Le,
        vmin: 0.0,
        vmax: 1.0,
    };
    let mpath = meta_path(path);
    std::fs::write(&mpath, meta_text(&meta, KIND_COEFFICIENTS)).map_err(|e| Error::io(&mpath, e))?;
    Ok(())
}

/// Reload coefficients dumped by [`save_coefficients`].
pub fn load_coefficients(path: &Path) -> Result<CoefficientVolume> {
    let (meta, kind) = read_meta(path)?;
    if kind != KIND_COEFFICIENTS {
        return Err(Error::format(
            "metadata",
            path,
            format!("expected kind={KIND_COEFFICIENTS}, found kind={kind}"),
        ));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = meta.voxel_count() * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            "coefficient data",
            path,
            format!("file is {} bytes, expected {expected}", bytes.len()),
        ));
    }
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(CoefficientVolume::from_parts(meta.dims, meta.spacing, data)?)
}
