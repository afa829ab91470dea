//! The rendering core: ray/box clipping, segment marching, compositing.
//!
//! A ray crossing the volume is divided into segments of `1 / samples_per_voxel`
//! voxel units (converted to world units along the ray direction, so
//! anisotropic volumes march correctly). Each segment contributes a
//! premultiplied color and an opacity, composited front to back. Segment
//! opacities are length-corrected so that translucency does not depend on
//! the sampling rate.
//!
//! Boundary handling is selectable: `Truncate` drops the fractional segment
//! left at the volume boundary or clip plane, `PartialSegment` emits a
//! shortened head/tail segment with correspondingly corrected opacity,
//! which removes the staircase discontinuities truncation causes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::camera::{Camera, Ray};
use crate::error::{Error, Result};
use crate::interp::{
    sample_nearest, sample_tricubic_bspline, sample_trilinear, CoefficientVolume, InterpolationMode,
};
use crate::math::Vec3;
use crate::mipmap::MipPyramid;
use crate::transfer::{correct_opacity_unchecked, PreintegrationTable, TransferFunction};
use crate::volume::ScalarVolume;

/// Segments shorter than this (voxel units) are skipped outright.
const MIN_SEGMENT: f64 = 1e-12;

/// How each segment's color and opacity are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentMode {
    /// One interpolation + classification at the segment midpoint.
    SingleSample,
    /// Table lookup keyed by the scalars at both segment endpoints.
    Preintegrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JitterMode {
    None,
    /// Deterministic per-pixel hash offset in `[0, segment)` at the start of
    /// each ray.
    Hashed { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    Truncate,
    PartialSegment,
}

/// Subdivide-on-high-contribution marching: any segment whose opacity
/// exceeds `threshold` is recursively halved, at most `max_depth` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSettings {
    pub threshold: f64,
    pub max_depth: u32,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        AdaptiveSettings { threshold: 0.1, max_depth: 3 }
    }
}

/// Oriented clipping plane; the half-space `normal . x + offset >= 0` is
/// kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipPlane {
    pub normal: Vec3,
    pub offset: f64,
}

/// Every knob of the discretized ray integral.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderSettings {
    /// Reciprocal of the segment length in voxel units.
    pub samples_per_voxel: f64,
    pub segment_mode: SegmentMode,
    pub interpolation: InterpolationMode,
    pub jitter: JitterMode,
    pub boundary_mode: BoundaryMode,
    /// Stop marching once accumulated opacity reaches `1 - epsilon`.
    pub early_termination_epsilon: Option<f64>,
    pub adaptive: Option<AdaptiveSettings>,
    pub clip_plane: Option<ClipPlane>,
    /// Pyramid level to sample; 0 is the full-resolution volume.
    pub mip_level: usize,
    /// Length-correct segment opacities. On by default; disabling it
    /// exists to demonstrate the translucency drift it causes.
    pub opacity_correction: bool,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            samples_per_voxel: 1.0,
            segment_mode: SegmentMode::SingleSample,
            interpolation: InterpolationMode::Trilinear,
            jitter: JitterMode::None,
            boundary_mode: BoundaryMode::PartialSegment,
            early_termination_epsilon: None,
            adaptive: None,
            clip_plane: None,
            mip_level: 0,
            opacity_correction: true,
        }
    }
}

impl RenderSettings {
    fn validate(&self) -> Result<()> {
        if !(self.samples_per_voxel > 0.0) {
            return Err(Error::Parameter(format!(
                "samples per voxel must be > 0, got {}",
                self.samples_per_voxel
            )));
        }
        if let Some(eps) = self.early_termination_epsilon {
            if !(0.0..1.0).contains(&eps) {
                return Err(Error::Parameter(format!(
                    "early termination epsilon must lie in [0, 1), got {eps}"
                )));
            }
        }
        if let Some(ad) = &self.adaptive {
            if !(ad.threshold >= 0.0 && ad.threshold <= 1.0) {
                return Err(Error::Parameter(format!(
                    "adaptive threshold must lie in [0, 1], got {}",
                    ad.threshold
                )));
            }
        }
        if let Some(cp) = &self.clip_plane {
            if cp.normal.length() == 0.0 {
                return Err(Error::Parameter("clip plane normal must be nonzero".into()));
            }
        }
        Ok(())
    }
}

/// One composited ray segment: premultiplied color, opacity and length in
/// voxel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSample {
    pub color: [f64; 3],
    pub opacity: f64,
    pub length: f64,
}

/// RGBA float image; RGB premultiplied, A the accumulated opacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Framebuffer {
    width: usize,
    height: usize,
    data: Vec<[f64; 4]>,
}

impl Framebuffer {
    pub fn new(width: usize, height: usize) -> Framebuffer {
        Framebuffer { width, height, data: vec![[0.0; 4]; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 4] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, value: [f64; 4]) {
        self.data[y * self.width + x] = value;
    }

    pub fn pixels(&self) -> &[[f64; 4]] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [[f64; 4]] {
        &mut self.data
    }

    /// Largest absolute per-pixel per-channel difference (RGBA).
    pub fn max_abs_diff(&self, other: &Framebuffer) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::Dimension(format!(
                "framebuffer sizes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.data.iter().zip(&other.data) {
            for c in 0..4 {
                let d = (a[c] - b[c]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        Ok(worst)
    }
}

/// Everything a render reads: the volume (or its pyramid), optional spline
/// coefficients, the transfer function and an optional pre-integration
/// table. All parts are borrowed immutably, so one scene can serve many
/// concurrent renders.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub volume: &'a ScalarVolume,
    pub pyramid: Option<&'a MipPyramid>,
    pub coefficients: Option<&'a CoefficientVolume>,
    pub transfer: &'a TransferFunction,
    pub preintegration: Option<&'a PreintegrationTable>,
}

impl<'a> Scene<'a> {
    pub fn simple(volume: &'a ScalarVolume, transfer: &'a TransferFunction) -> Scene<'a> {
        Scene { volume, pyramid: None, coefficients: None, transfer, preintegration: None }
    }
}

/// Slab-method intersection of a ray with an axis-aligned box, additionally
/// clipped by an optional half-space. Returns the world-unit parameter
/// interval, with the entry clamped to `t >= 0`; `None` when the ray misses.
pub fn ray_box_intersect(
    ray: &Ray,
    box_min: Vec3,
    box_max: Vec3,
    clip: Option<&ClipPlane>,
) -> Option<(f64, f64)> {
    debug_assert!(box_min.x < box_max.x && box_min.y < box_max.y && box_min.z < box_max.z);
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    let axes = [
        (ray.origin.x, ray.direction.x, box_min.x, box_max.x),
        (ray.origin.y, ray.direction.y, box_min.y, box_max.y),
        (ray.origin.z, ray.direction.z, box_min.z, box_max.z),
    ];
    for (o, d, lo, hi) in axes {
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
        } else {
            let ta = (lo - o) / d;
            let tb = (hi - o) / d;
            let (near, far) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(near);
            t1 = t1.min(far);
        }
    }
    if let Some(cp) = clip {
        let denom = cp.normal.dot(ray.direction);
        let num = cp.normal.dot(ray.origin) + cp.offset;
        if denom.abs() < 1e-15 {
            if num < 0.0 {
                return None;
            }
        } else {
            let tp = -num / denom;
            if denom > 0.0 {
                t0 = t0.max(tp);
            } else {
                t1 = t1.min(tp);
            }
        }
    }
    let t0 = t0.max(0.0);
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z
}

/// Deterministic per-pixel ray start offset, uniform on `[0, d)`.
///
/// The hash chains the splitmix64 finalizer over `(px, py, seed)`; the top
/// 53 bits of the result select the offset, so the same inputs always give
/// the same offset on every platform.
pub fn jitter_offset(px: u32, py: u32, seed: u64, d: f64) -> f64 {
    debug_assert!(d > 0.0);
    let mut h = mix64((px as u64).wrapping_add(0x9e37_79b9_7f4a_7c15));
    h = mix64(h ^ (py as u64));
    h = mix64(h ^ seed);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * d
}

/// Front-to-back compositing of an ordered (near to far) sample list:
/// each sample's premultiplied color is weighted by the transmittance of
/// the strictly preceding segments.
pub fn composite_front_to_back(samples: &[SegmentSample]) -> ([f64; 3], f64) {
    let mut rgb = [0.0f64; 3];
    let mut transmittance = 1.0f64;
    for s in samples {
        rgb[0] += transmittance * s.color[0];
        rgb[1] += transmittance * s.color[1];
        rgb[2] += transmittance * s.color[2];
        transmittance *= 1.0 - s.opacity;
    }
    (rgb, 1.0 - transmittance)
}

struct Accumulator {
    rgb: [f64; 3],
    transmittance: f64,
}

impl Accumulator {
    fn new() -> Accumulator {
        Accumulator { rgb: [0.0; 3], transmittance: 1.0 }
    }

    #[inline]
    fn composite(&mut self, premultiplied: [f64; 3], opacity: f64) {
        self.rgb[0] += self.transmittance * premultiplied[0];
        self.rgb[1] += self.transmittance * premultiplied[1];
        self.rgb[2] += self.transmittance * premultiplied[2];
        self.transmittance *= 1.0 - opacity;
    }

    fn result(&self) -> ([f64; 3], f64) {
        (self.rgb, 1.0 - self.transmittance)
    }
}

/// A validated, resolved render context. Construction checks that the
/// settings are consistent with the scene (coefficients present and matching
/// for tricubic sampling, table present for pre-integrated marching, pyramid
/// level in range); after that, per-pixel work is pure and reentrant.
pub struct Renderer<'a> {
    active: &'a ScalarVolume,
    coefficients: Option<&'a CoefficientVolume>,
    transfer: &'a TransferFunction,
    preintegration: Option<&'a PreintegrationTable>,
    settings: RenderSettings,
    bounds: (Vec3, Vec3),
    inv_spacing: Vec3,
}

impl<'a> Renderer<'a> {
    pub fn new(scene: &Scene<'a>, settings: &RenderSettings) -> Result<Renderer<'a>> {
        settings.validate()?;
        let active: &ScalarVolume = if settings.mip_level == 0 {
            scene.volume
        } else {
            let pyramid = scene.pyramid.ok_or_else(|| {
                Error::Config(format!(
                    "mip level {} requested but no pyramid provided",
                    settings.mip_level
                ))
            })?;
            pyramid.level(settings.mip_level).ok_or_else(|| {
                Error::Config(format!(
                    "mip level {} outside pyramid of {} levels",
                    settings.mip_level,
                    pyramid.level_count()
                ))
            })?
        };
        let coefficients = match settings.interpolation {
            InterpolationMode::TricubicBspline => {
                let coeffs = scene.coefficients.ok_or_else(|| {
                    Error::Config("tricubic interpolation requires a coefficient volume".into())
                })?;
                if coeffs.dims() != active.dims() || coeffs.spacing() != active.spacing() {
                    return Err(Error::Config(format!(
                        "coefficient volume {:?} does not match the sampled volume {:?}",
                        coeffs.dims(),
                        active.dims()
                    )));
                }
                Some(coeffs)
            }
            _ => scene.coefficients,
        };
        if settings.segment_mode == SegmentMode::Preintegrated && scene.preintegration.is_none() {
            return Err(Error::Config(
                "pre-integrated marching requires a pre-integration table".into(),
            ));
        }
        let spacing = active.spacing_vec();
        Ok(Renderer {
            active,
            coefficients,
            transfer: scene.transfer,
            preintegration: scene.preintegration,
            settings: settings.clone(),
            bounds: active.world_bounds(),
            inv_spacing: Vec3::new(1.0 / spacing.x, 1.0 / spacing.y, 1.0 / spacing.z),
        })
    }

    pub fn settings(&self) -> &RenderSettings {
        &self.settings
    }

    pub fn active_volume(&self) -> &ScalarVolume {
        self.active
    }

    /// World-space bounds of the sampled volume.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        self.bounds
    }

    #[inline]
    fn sample_voxel_space(&self, p: Vec3) -> f64 {
        match self.settings.interpolation {
            InterpolationMode::Nearest => sample_nearest(self.active, p),
            InterpolationMode::Trilinear => sample_trilinear(self.active, p),
            InterpolationMode::TricubicBspline => {
                sample_tricubic_bspline(self.coefficients.expect("validated"), p)
            }
        }
    }

    /// Evaluate one segment `[t0, t1]` and composite it, recursively halving
    /// high-opacity segments in adaptive mode. Returns `false` once the ray
    /// is terminated early.
    fn eval_segment(
        &self,
        origin_v: Vec3,
        dir_v: Vec3,
        vlen: f64,
        t0: f64,
        t1: f64,
        depth: u32,
        acc: &mut Accumulator,
    ) -> bool {
        let d_seg = (t1 - t0) * vlen;
        if d_seg <= MIN_SEGMENT {
            return true;
        }
        let (premult, opacity) = match self.settings.segment_mode {
            SegmentMode::SingleSample => {
                let v = self.sample_voxel_space(origin_v + dir_v * (0.5 * (t0 + t1)));
                let (color, alpha_ref) = self.transfer.classify(v);
                let alpha = if self.settings.opacity_correction {
                    correct_opacity_unchecked(alpha_ref, d_seg / self.transfer.d_ref())
                } else {
                    alpha_ref
                };
                ([color[0] * alpha, color[1] * alpha, color[2] * alpha], alpha)
            }
            SegmentMode::Preintegrated => {
                let table = self.preintegration.expect("validated");
                let v0 = self.sample_voxel_space(origin_v + dir_v * t0);
                let v1 = self.sample_voxel_space(origin_v + dir_v * t1);
                if self.settings.opacity_correction {
                    table.lookup(v0, v1, d_seg)
                } else {
                    table.lookup_raw(v0, v1)
                }
            }
        };
        if let Some(adaptive) = &self.settings.adaptive {
            if depth < adaptive.max_depth && opacity > adaptive.threshold {
                let mid = 0.5 * (t0 + t1);
                if !self.eval_segment(origin_v, dir_v, vlen, t0, mid, depth + 1, acc) {
                    return false;
                }
                return self.eval_segment(origin_v, dir_v, vlen, mid, t1, depth + 1, acc);
            }
        }
        acc.composite(premult, opacity);
        if let Some(eps) = self.settings.early_termination_epsilon {
            if acc.transmittance <= eps {
                return false;
            }
        }
        true
    }

    /// March the ray over `[t_in, t_out]` (world units) with the resolved
    /// settings; `jitter` shifts the first full segment forward by a world
    /// distance in `[0, segment)`.
    pub fn march(&self, ray: &Ray, t_in: f64, t_out: f64, jitter: f64) -> Result<([f64; 3], f64)> {
        if !(t_in < t_out) {
            return Err(Error::Parameter(format!(
                "segment interval is empty: t_in {t_in} >= t_out {t_out}"
            )));
        }
        let origin_v = ray.origin.mul_elem(self.inv_spacing);
        let dir_v = ray.direction.mul_elem(self.inv_spacing);
        let vlen = dir_v.length();
        let dw = 1.0 / (self.settings.samples_per_voxel * vlen);
        let partial = self.settings.boundary_mode == BoundaryMode::PartialSegment;
        let mut acc = Accumulator::new();

        let start = t_in + jitter;
        if start >= t_out {
            if partial {
                self.eval_segment(origin_v, dir_v, vlen, t_in, t_out, 0, &mut acc);
            }
            return Ok(acc.result());
        }
        if partial && jitter > 0.0 && !self.eval_segment(origin_v, dir_v, vlen, t_in, start, 0, &mut acc) {
            return Ok(acc.result());
        }

        let n_full = libm::floor((t_out - start) / dw) as u64;
        let mut end = start;
        for k in 0..n_full {
            let t0 = start + k as f64 * dw;
            let t1 = start + (k + 1) as f64 * dw;
            end = t1;
            if !self.eval_segment(origin_v, dir_v, vlen, t0, t1, 0, &mut acc) {
                return Ok(acc.result());
            }
        }
        if partial && end < t_out {
            self.eval_segment(origin_v, dir_v, vlen, end, t_out, 0, &mut acc);
        }
        Ok(acc.result())
    }

    /// Render one pixel: generate its ray, clip it against the volume and
    /// the optional clip plane, and march. Misses return transparent black.
    pub fn render_pixel(&self, camera: &Camera, px: usize, py: usize) -> [f64; 4] {
        let ray = camera.generate_ray(px, py);
        match ray_box_intersect(&ray, self.bounds.0, self.bounds.1, self.settings.clip_plane.as_ref()) {
            None => [0.0; 4],
            Some((t_in, t_out)) => {
                let jitter = match self.settings.jitter {
                    JitterMode::None => 0.0,
                    JitterMode::Hashed { seed } => {
                        let dir_v = ray.direction.mul_elem(self.inv_spacing);
                        let dw = 1.0 / (self.settings.samples_per_voxel * dir_v.length());
                        jitter_offset(px as u32, py as u32, seed, dw)
                    }
                };
                match self.march(&ray, t_in, t_out, jitter) {
                    Ok((rgb, alpha)) => [rgb[0], rgb[1], rgb[2], alpha],
                    // t_in == t_out after clipping: nothing to integrate
                    Err(_) => [0.0; 4],
                }
            }
        }
    }

    /// Sequential whole-frame render.
    pub fn render(&self, camera: &Camera) -> Framebuffer {
        let (width, height) = camera.viewport();
        let mut fb = Framebuffer::new(width, height);
        for py in 0..height {
            for px in 0..width {
                fb.set_pixel(px, py, self.render_pixel(camera, px, py));
            }
        }
        fb
    }
}

/// Integrate a single ray over `[t_in, t_out]`. Convenience wrapper that
/// validates the scene/settings combination per call; renders use
/// [`Renderer`] directly.
pub fn integrate_ray(
    scene: &Scene,
    ray: &Ray,
    t_in: f64,
    t_out: f64,
    settings: &RenderSettings,
    jitter: f64,
) -> Result<([f64; 3], f64)> {
    Renderer::new(scene, settings)?.march(ray, t_in, t_out, jitter)
}

/// Render a full frame with the given scene, camera and settings.
pub fn render_frame(scene: &Scene, camera: &Camera, settings: &RenderSettings) -> Result<Framebuffer> {
    Ok(Renderer::new(scene, settings)?.render(camera))
}
