//! Data-parallel drivers for the pure per-pixel and per-line kernels of the
//! core crate. Every function here produces output bit-identical to its
//! sequential counterpart: rendering partitions the framebuffer into
//! disjoint rows, prefiltering partitions the volume into independent
//! lines, and table construction partitions over entries, so only the
//! execution order changes.

use rayon::prelude::*;

use volren_core::camera::Camera;
use volren_core::interp::{bspline_filter_line, CoefficientVolume};
use volren_core::raycast::{Framebuffer, Renderer, RenderSettings, Scene};
use volren_core::transfer::{
    preintegrate_segment, PreintegrationTable, TransferFunction,
};
use volren_core::volume::ScalarVolume;

use crate::error::Result;

/// Parallel whole-frame render; rows are rendered concurrently.
pub fn render_frame(scene: &Scene, camera: &Camera, settings: &RenderSettings) -> Result<Framebuffer> {
    let renderer = Renderer::new(scene, settings)?;
    let (width, height) = camera.viewport();
    let mut fb = Framebuffer::new(width, height);
    fb.pixels_mut()
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(py, row)| {
            for (px, out) in row.iter_mut().enumerate() {
                *out = renderer.render_pixel(camera, px, py);
            }
        });
    Ok(fb)
}

/// Parallel B-spline prefilter.
///
/// The x pass runs over contiguous rows, the y pass over independent
/// z-slabs. Lines of the z pass span the whole array, so that pass gathers
/// into a z-fastest scratch buffer (filtering each contiguous line there)
/// and scatters back; gathers read shared data and every write lands in a
/// disjoint chunk.
pub fn prefilter_bspline_coefficients(vol: &ScalarVolume) -> Result<CoefficientVolume> {
    let (nx, ny, nz) = vol.dims();
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(volren_core::Error::Parameter(format!(
            "prefilter requires every axis length >= 2, got {:?}",
            vol.dims()
        ))
        .into());
    }
    let mut data: Vec<f32> = vol.data().to_vec();

    // x pass: rows are contiguous
    data.par_chunks_mut(nx).for_each(|line| {
        let mut buf: Vec<f64> = line.iter().map(|&v| v as f64).collect();
        bspline_filter_line(&mut buf);
        for (dst, &src) in line.iter_mut().zip(&buf) {
            *dst = src as f32;
        }
    });

    // y pass: each z-slab holds nx independent y-lines
    data.par_chunks_mut(nx * ny).for_each(|slab| {
        let mut buf = vec![0.0f64; ny];
        for i in 0..nx {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = slab[j * nx + i] as f64;
            }
            bspline_filter_line(&mut buf);
            for (j, &b) in buf.iter().enumerate() {
                slab[j * nx + i] = b as f32;
            }
        }
    });

    // z pass: gather into z-fastest scratch, filter, scatter back
    let stride = nx * ny;
    let mut scratch = vec![0.0f32; data.len()];
    scratch.par_chunks_mut(nz).enumerate().for_each(|(column, chunk)| {
        let mut buf: Vec<f64> = (0..nz).map(|k| data[column + k * stride] as f64).collect();
        bspline_filter_line(&mut buf);
        for (dst, &src) in chunk.iter_mut().zip(&buf) {
            *dst = src as f32;
        }
    });
    data.par_chunks_mut(nx).enumerate().for_each(|(row, line)| {
        let y = row % ny;
        let z = row / ny;
        for (x, dst) in line.iter_mut().enumerate() {
            *dst = scratch[z + nz * (x + nx * y)];
        }
    });

    Ok(CoefficientVolume::from_parts(vol.dims(), vol.spacing(), data)?)
}

/// Parallel pre-integration table construction (one task per entry).
pub fn build_preintegration_table(
    tf: &TransferFunction,
    d_base: f64,
    resolution: usize,
    steps: usize,
) -> Result<PreintegrationTable> {
    if resolution < 2 || steps < 1 || !(d_base > 0.0) {
        // reuse the sequential path's validation errors
        return Ok(volren_core::transfer::build_preintegration_table(tf, d_base, resolution, steps)?);
    }
    let last = (resolution - 1) as f64;
    let entries: Vec<[f64; 4]> = (0..resolution * resolution)
        .into_par_iter()
        .map(|index| {
            let i0 = index % resolution;
            let i1 = index / resolution;
            preintegrate_segment(tf, i0 as f64 / last, i1 as f64 / last, d_base, steps)
        })
        .collect();
    Ok(PreintegrationTable::from_entries(resolution, d_base, entries)?)
}
