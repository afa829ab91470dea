//! Classification: scalar to color/opacity lookup, opacity correction for
//! segment length, pre-integrated segment tables and lookup-table smoothing.
//!
//! Opacity entries are per-segment opacities calibrated at the table's
//! reference length `d_ref`. Rescaling a segment opacity from length `d1`
//! to `d2` uses `a2 = 1 - (1 - a1)^(d2/d1)`, which keeps the transmittance
//! product invariant under splitting a segment into parts.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Lookup table mapping a normalized scalar to straight (non-premultiplied)
/// RGB and opacity, with linear blending between adjacent entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    entries: Vec<[f64; 4]>,
    d_ref: f64,
}

impl TransferFunction {
    /// `entries` are `[r, g, b, a]` records, each channel in `[0, 1]`;
    /// `d_ref` is the segment length (voxel units) the opacities are
    /// calibrated for.
    pub fn new(entries: Vec<[f64; 4]>, d_ref: f64) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Parameter(format!(
                "transfer function needs at least 2 entries, got {}",
                entries.len()
            )));
        }
        if !(d_ref > 0.0) {
            return Err(Error::Parameter(format!("reference length must be > 0, got {d_ref}")));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::Parameter(format!("entry {i} has channels outside [0, 1]: {e:?}")));
            }
        }
        Ok(TransferFunction { entries, d_ref })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[[f64; 4]] {
        &self.entries
    }

    pub fn d_ref(&self) -> f64 {
        self.d_ref
    }

    /// Straight color and opacity for scalar `v` (clamped to `[0, 1]`),
    /// linearly blended between the two nearest entries. The opacity is
    /// calibrated to `d_ref`.
    pub fn classify(&self, v: f64) -> ([f64; 3], f64) {
        let v = v.clamp(0.0, 1.0);
        let pos = v * (self.entries.len() - 1) as f64;
        let i = libm::floor(pos) as usize;
        let i = i.min(self.entries.len() - 2);
        let f = pos - i as f64;
        let a = &self.entries[i];
        let b = &self.entries[i + 1];
        (
            [
                a[0] + f * (b[0] - a[0]),
                a[1] + f * (b[1] - a[1]),
                a[2] + f * (b[2] - a[2]),
            ],
            a[3] + f * (b[3] - a[3]),
        )
    }
}

/// Rescale a segment opacity from length `d1` to length `d2`:
/// `a2 = 1 - (1 - a1)^(d2/d1)`.
pub fn correct_opacity(alpha: f64, d1: f64, d2: f64) -> Result<f64> {
    if !(d1 > 0.0) {
        return Err(Error::Parameter(format!("reference length must be > 0, got {d1}")));
    }
    if !(d2 >= 0.0) {
        return Err(Error::Parameter(format!("target length must be >= 0, got {d2}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("opacity {alpha} outside [0, 1]")));
    }
    Ok(correct_opacity_unchecked(alpha, d2 / d1))
}

/// `1 - (1 - alpha)^ratio` with the exact fast paths used by the ray
/// marcher (ratio 1 and fully transparent/opaque segments skip the `pow`).
#[inline]
pub fn correct_opacity_unchecked(alpha: f64, ratio: f64) -> f64 {
    if alpha <= 0.0 {
        return 0.0;
    }
    if ratio == 1.0 {
        return alpha;
    }
    if alpha >= 1.0 {
        return if ratio > 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - libm::pow(1.0 - alpha, ratio)
}

/// 2D table of pre-integrated segment results. Entry `(v0, v1)` holds the
/// emission-absorption result of a segment of length `d_base` whose scalar
/// varies linearly from `v0` to `v1`; colors are stored premultiplied.
#[derive(Debug, Clone, PartialEq)]
pub struct PreintegrationTable {
    resolution: usize,
    d_base: f64,
    /// `resolution^2` records `[r, g, b, a]`, `v0` fastest.
    entries: Vec<[f64; 4]>,
}

impl PreintegrationTable {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn d_base(&self) -> f64 {
        self.d_base
    }

    pub fn entries(&self) -> &[[f64; 4]] {
        &self.entries
    }

    pub fn entry(&self, i0: usize, i1: usize) -> [f64; 4] {
        self.entries[i1 * self.resolution + i0]
    }

    pub fn from_entries(resolution: usize, d_base: f64, entries: Vec<[f64; 4]>) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Parameter(format!("table resolution must be >= 2, got {resolution}")));
        }
        if !(d_base > 0.0) {
            return Err(Error::Parameter(format!("base length must be > 0, got {d_base}")));
        }
        if entries.len() != resolution * resolution {
            return Err(Error::Dimension(format!(
                "table entry count {} does not match resolution {resolution}",
                entries.len()
            )));
        }
        Ok(PreintegrationTable { resolution, d_base, entries })
    }

    /// Bilinear fetch at `(v0, v1)` followed by length adaptation when the
    /// actual segment length differs from `d_base`: the opacity is rescaled
    /// by the length-correction power law and the premultiplied color is
    /// scaled proportionally (pass-through below a tiny stored opacity).
    pub fn lookup(&self, v0: f64, v1: f64, d: f64) -> ([f64; 3], f64) {
        debug_assert!(d > 0.0);
        let e = self.fetch_bilinear(v0, v1);
        let (rgb, alpha) = ([e[0], e[1], e[2]], e[3]);
        if (d - self.d_base).abs() < 1e-12 {
            return (rgb, alpha);
        }
        let corrected = correct_opacity_unchecked(alpha, d / self.d_base);
        let scale = if alpha < 1e-7 { 1.0 } else { corrected / alpha };
        ([rgb[0] * scale, rgb[1] * scale, rgb[2] * scale], corrected)
    }

    /// Bilinear fetch without any length adaptation.
    pub fn lookup_raw(&self, v0: f64, v1: f64) -> ([f64; 3], f64) {
        let e = self.fetch_bilinear(v0, v1);
        ([e[0], e[1], e[2]], e[3])
    }

    fn fetch_bilinear(&self, v0: f64, v1: f64) -> [f64; 4] {
        let last = (self.resolution - 1) as f64;
        let p0 = v0.clamp(0.0, 1.0) * last;
        let p1 = v1.clamp(0.0, 1.0) * last;
        let i0 = (libm::floor(p0) as usize).min(self.resolution - 2);
        let i1 = (libm::floor(p1) as usize).min(self.resolution - 2);
        let f0 = p0 - i0 as f64;
        let f1 = p1 - i1 as f64;
        let e00 = self.entry(i0, i1);
        let e10 = self.entry(i0 + 1, i1);
        let e01 = self.entry(i0, i1 + 1);
        let e11 = self.entry(i0 + 1, i1 + 1);
        let mut out = [0.0; 4];
        for c in 0..4 {
            let a = e00[c] + f0 * (e10[c] - e00[c]);
            let b = e01[c] + f0 * (e11[c] - e01[c]);
            out[c] = a + f1 * (b - a);
        }
        out
    }
}

/// Pre-integrate a single segment: `steps`-step midpoint-rule evaluation of
/// the emission-absorption integral along a linear scalar ramp `v0 -> v1`
/// over length `d_base`, compositing front to back with length-corrected
/// sub-step opacities. Returns premultiplied `[r, g, b, a]`.
pub fn preintegrate_segment(
    tf: &TransferFunction,
    v0: f64,
    v1: f64,
    d_base: f64,
    steps: usize,
) -> [f64; 4] {
    let h = d_base / steps as f64;
    let ratio = h / tf.d_ref();
    let mut rgb = [0.0f64; 3];
    let mut transmittance = 1.0f64;
    for s in 0..steps {
        let frac = (s as f64 + 0.5) / steps as f64;
        let v = v0 + (v1 - v0) * frac;
        let (color, alpha_ref) = tf.classify(v);
        let alpha = correct_opacity_unchecked(alpha_ref, ratio);
        let weight = transmittance * alpha;
        rgb[0] += weight * color[0];
        rgb[1] += weight * color[1];
        rgb[2] += weight * color[2];
        transmittance *= 1.0 - alpha;
    }
    [rgb[0], rgb[1], rgb[2], 1.0 - transmittance]
}

/// Build the full `resolution^2` pre-integration table for segments of
/// length `d_base`. Deterministic; entries indexed by the scalar values at
/// the segment start (`v0`, fastest) and end (`v1`).
pub fn build_preintegration_table(
    tf: &TransferFunction,
    d_base: f64,
    resolution: usize,
    steps: usize,
) -> Result<PreintegrationTable> {
    if resolution < 2 {
        return Err(Error::Parameter(format!("table resolution must be >= 2, got {resolution}")));
    }
    if steps < 1 {
        return Err(Error::Parameter(format!("integration steps must be >= 1, got {steps}")));
    }
    if !(d_base > 0.0) {
        return Err(Error::Parameter(format!("base length must be > 0, got {d_base}")));
    }
    let last = (resolution - 1) as f64;
    let mut entries = Vec::with_capacity(resolution * resolution);
    for i1 in 0..resolution {
        let v1 = i1 as f64 / last;
        for i0 in 0..resolution {
            let v0 = i0 as f64 / last;
            entries.push(preintegrate_segment(tf, v0, v1, d_base, steps));
        }
    }
    PreintegrationTable::from_entries(resolution, d_base, entries)
}

/// Gaussian-blur every channel of the lookup table over the entry index
/// (clamped boundary). `sigma` is in entries; 0 returns the table unchanged.
pub fn smooth_transfer_function(tf: &TransferFunction, sigma: f64) -> Result<TransferFunction> {
    if !(sigma >= 0.0) {
        return Err(Error::Parameter(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(tf.clone());
    }
    let radius = libm::ceil(3.0 * sigma) as i64;
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    for o in -radius..=radius {
        kernel.push(libm::exp(-(o as f64 * o as f64) / (2.0 * sigma * sigma)));
    }
    let norm: f64 = kernel.iter().sum();
    let n = tf.len() as i64;
    let entries = (0..n)
        .map(|i| {
            let mut acc = [0.0f64; 4];
            for (ki, w) in kernel.iter().enumerate() {
                let src = (i + ki as i64 - radius).clamp(0, n - 1) as usize;
                let e = tf.entries()[src];
                for c in 0..4 {
                    acc[c] += w * e[c];
                }
            }
            // clamp away rounding dust so the result stays a valid table
            [
                (acc[0] / norm).clamp(0.0, 1.0),
                (acc[1] / norm).clamp(0.0, 1.0),
                (acc[2] / norm).clamp(0.0, 1.0),
                (acc[3] / norm).clamp(0.0, 1.0),
            ]
        })
        .collect();
    TransferFunction::new(entries, tf.d_ref())
}
