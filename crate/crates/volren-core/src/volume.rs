//! Voxel volume storage and raw-sample conversion.
//!
//! A [`ScalarVolume`] is a dense 3D grid of normalized scalars in `[0, 1]`,
//! stored x-fastest. Voxel centers sit at integer coordinates in voxel
//! space; world coordinates are voxel coordinates scaled by the per-axis
//! spacing. The volume is immutable after construction and safe to share
//! across concurrent renders.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::Vec3;

/// Sample type of a raw voxel file. Multi-byte types are little-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    U8,
    U16Le,
    F32Le,
}

impl Dtype {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::U16Le => 2,
            Dtype::F32Le => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::U8 => "u8",
            Dtype::U16Le => "u16le",
            Dtype::F32Le => "f32le",
        }
    }

    pub fn parse(s: &str) -> Result<Dtype> {
        match s {
            "u8" => Ok(Dtype::U8),
            "u16le" => Ok(Dtype::U16Le),
            "f32le" => Ok(Dtype::F32Le),
            other => Err(Error::Parameter(format!("unknown dtype '{other}'"))),
        }
    }
}

/// Description of a raw voxel file: shape, spacing, sample type and the
/// raw-value range mapped onto `[0, 1]` at load time.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeMeta {
    pub dims: (usize, usize, usize),
    pub spacing: (f64, f64, f64),
    pub dtype: Dtype,
    pub vmin: f64,
    pub vmax: f64,
}

impl VolumeMeta {
    pub fn validate(&self) -> Result<()> {
        check_dims(self.dims)?;
        check_spacing(self.spacing)?;
        if !(self.vmax > self.vmin) {
            return Err(Error::Parameter(format!(
                "vmax ({}) must exceed vmin ({})",
                self.vmax, self.vmin
            )));
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }
}

fn check_dims(dims: (usize, usize, usize)) -> Result<()> {
    if dims.0 < 1 || dims.1 < 1 || dims.2 < 1 {
        return Err(Error::Parameter(format!("dims must be >= 1, got {dims:?}")));
    }
    Ok(())
}

fn check_spacing(spacing: (f64, f64, f64)) -> Result<()> {
    if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0) {
        return Err(Error::Parameter(format!(
            "spacing must be > 0 on every axis, got {spacing:?}"
        )));
    }
    Ok(())
}

/// Dense scalar grid with spacing metadata. Data is normalized to `[0, 1]`,
/// flat, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarVolume {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    data: Vec<f32>,
}

impl ScalarVolume {
    pub fn new(dims: (usize, usize, usize), spacing: (f64, f64, f64), data: Vec<f32>) -> Result<Self> {
        check_dims(dims)?;
        check_spacing(spacing)?;
        let count = dims.0 * dims.1 * dims.2;
        if data.len() != count {
            return Err(Error::Dimension(format!(
                "data length {} does not match dims {:?} ({} voxels)",
                data.len(),
                dims,
                count
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parameter(format!(
                "scalar {bad} outside [0, 1]"
            )));
        }
        Ok(ScalarVolume { dims, spacing, data })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    pub fn spacing_vec(&self) -> Vec3 {
        Vec3::new(self.spacing.0, self.spacing.1, self.spacing.2)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn voxel_count(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims.1 + j) * self.dims.0 + i
    }

    /// Stored scalar at the given indices; indices outside the grid are
    /// clamped to the nearest valid voxel.
    #[inline]
    pub fn voxel_fetch(&self, i: i64, j: i64, k: i64) -> f64 {
        let ci = clamp_index(i, self.dims.0);
        let cj = clamp_index(j, self.dims.1);
        let ck = clamp_index(k, self.dims.2);
        self.data[self.linear_index(ci, cj, ck)] as f64
    }

    /// World-space bounding box: each voxel owns a half-spacing margin
    /// around its center, so the box spans `[-s/2, (n - 1/2) * s]` per axis.
    pub fn world_bounds(&self) -> (Vec3, Vec3) {
        let s = self.spacing_vec();
        let min = Vec3::new(-0.5 * s.x, -0.5 * s.y, -0.5 * s.z);
        let max = Vec3::new(
            (self.dims.0 as f64 - 0.5) * s.x,
            (self.dims.1 as f64 - 0.5) * s.y,
            (self.dims.2 as f64 - 0.5) * s.z,
        );
        (min, max)
    }

    pub fn mean(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|&v| v as f64).sum();
        sum / self.data.len() as f64
    }
}

#[inline]
fn clamp_index(i: i64, n: usize) -> usize {
    if i < 0 {
        0
    } else if i as usize >= n {
        n - 1
    } else {
        i as usize
    }
}

/// Convert raw little-endian samples into a normalized volume:
/// `(raw - vmin) / (vmax - vmin)`, clamped to `[0, 1]`.
///
/// The byte length must match `dims * dtype size` exactly.
pub fn decode_raw(meta: &VolumeMeta, bytes: &[u8]) -> Result<ScalarVolume> {
    meta.validate()?;
    let count = meta.voxel_count();
    let expected = count * meta.dtype.bytes_per_sample();
    if bytes.len() != expected {
        return Err(Error::Dimension(format!(
            "raw data is {} bytes, expected {} ({} samples of {})",
            bytes.len(),
            expected,
            count,
            meta.dtype.name()
        )));
    }
    let scale = 1.0 / (meta.vmax - meta.vmin);
    let normalize = |raw: f64| ((raw - meta.vmin) * scale).clamp(0.0, 1.0) as f32;
    let data: Vec<f32> = match meta.dtype {
        Dtype::U8 => bytes.iter().map(|&b| normalize(b as f64)).collect(),
        Dtype::U16Le => bytes
            .chunks_exact(2)
            .map(|c| normalize(u16::from_le_bytes([c[0], c[1]]) as f64))
            .collect(),
        Dtype::F32Le => bytes
            .chunks_exact(4)
            .map(|c| normalize(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
            .collect(),
    };
    ScalarVolume::new(meta.dims, meta.spacing, data)
}

/// Flatten a volume into raw little-endian samples. Integer dtypes quantize
/// with round-half-away-from-zero over the full dtype range; `f32le` is a
/// bit-exact dump.
pub fn encode_raw(vol: &ScalarVolume, dtype: Dtype) -> Vec<u8> {
    let mut out = Vec::with_capacity(vol.voxel_count() * dtype.bytes_per_sample());
    match dtype {
        Dtype::U8 => {
            for &v in vol.data() {
                out.push(libm::round(v as f64 * 255.0) as u8);
            }
        }
        Dtype::U16Le => {
            for &v in vol.data() {
                let q = libm::round(v as f64 * 65535.0) as u16;
                out.extend_from_slice(&q.to_le_bytes());
            }
        }
        Dtype::F32Le => {
            for &v in vol.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

/// Meta describing the file produced by [`encode_raw`] for this volume.
pub fn encoded_meta(vol: &ScalarVolume, dtype: Dtype) -> VolumeMeta {
    let (vmin, vmax) = match dtype {
        Dtype::U8 => (0.0, 255.0),
        Dtype::U16Le => (0.0, 65535.0),
        Dtype::F32Le => (0.0, 1.0),
    };
    VolumeMeta {
        dims: vol.dims(),
        spacing: vol.spacing(),
        dtype,
        vmin,
        vmax,
    }
}
