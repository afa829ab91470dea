//! Continuous reconstruction of the scalar field from voxel samples.
//!
//! Three reconstruction filters are provided: nearest-neighbor, trilinear,
//! and prefiltered tricubic B-spline. The tricubic path interpolates (rather
//! than approximates) the voxel values because the coefficients are computed
//! by the recursive causal/anticausal prefilter; evaluating the cubic
//! B-spline expansion on those coefficients reproduces every grid sample.
//!
//! All sample positions are in voxel space: voxel centers at integer
//! coordinates, world position = voxel position * spacing.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::volume::ScalarVolume;

/// Reconstruction filter selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationMode {
    Nearest,
    Trilinear,
    /// Requires a [`CoefficientVolume`] built from the rendered volume.
    TricubicBspline,
}

impl InterpolationMode {
    pub fn parse(s: &str) -> Result<InterpolationMode> {
        match s {
            "nearest" => Ok(InterpolationMode::Nearest),
            "trilinear" => Ok(InterpolationMode::Trilinear),
            "tricubic" => Ok(InterpolationMode::TricubicBspline),
            other => Err(Error::Parameter(format!("unknown interpolation mode '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InterpolationMode::Nearest => "nearest",
            InterpolationMode::Trilinear => "trilinear",
            InterpolationMode::TricubicBspline => "tricubic",
        }
    }
}

/// Pole of the cubic B-spline direct filter: `sqrt(3) - 2`.
pub const BSPLINE_POLE: f64 = -0.267_949_192_431_122_7;

/// Overall gain of the two single-pole passes: `(1 - z)(1 - 1/z) = 6`.
pub const BSPLINE_GAIN: f64 = 6.0;

/// Truncation tolerance of the causal initialization sum.
pub const PREFILTER_INIT_TOLERANCE: f64 = 1e-8;

/// Number of terms after which the truncated causal init sum contributes
/// less than [`PREFILTER_INIT_TOLERANCE`]: `ceil(log(tol) / log(|pole|))`.
pub fn prefilter_init_horizon() -> usize {
    libm::ceil(libm::log(PREFILTER_INIT_TOLERANCE) / libm::log(-BSPLINE_POLE)) as usize
}

/// Nearest-voxel sample; ties round half up per axis, positions outside the
/// grid clamp to the edge voxel.
pub fn sample_nearest(vol: &ScalarVolume, p: Vec3) -> f64 {
    let i = libm::floor(p.x + 0.5) as i64;
    let j = libm::floor(p.y + 0.5) as i64;
    let k = libm::floor(p.z + 0.5) as i64;
    vol.voxel_fetch(i, j, k)
}

/// Standard 8-neighbor trilinear blend with clamped indexing.
pub fn sample_trilinear(vol: &ScalarVolume, p: Vec3) -> f64 {
    let ix = libm::floor(p.x);
    let iy = libm::floor(p.y);
    let iz = libm::floor(p.z);
    let fx = p.x - ix;
    let fy = p.y - iy;
    let fz = p.z - iz;
    let (i, j, k) = (ix as i64, iy as i64, iz as i64);

    let c000 = vol.voxel_fetch(i, j, k);
    let c100 = vol.voxel_fetch(i + 1, j, k);
    let c010 = vol.voxel_fetch(i, j + 1, k);
    let c110 = vol.voxel_fetch(i + 1, j + 1, k);
    let c001 = vol.voxel_fetch(i, j, k + 1);
    let c101 = vol.voxel_fetch(i + 1, j, k + 1);
    let c011 = vol.voxel_fetch(i, j + 1, k + 1);
    let c111 = vol.voxel_fetch(i + 1, j + 1, k + 1);

    let c00 = c000 + fx * (c100 - c000);
    let c10 = c010 + fx * (c110 - c010);
    let c01 = c001 + fx * (c101 - c001);
    let c11 = c011 + fx * (c111 - c011);
    let c0 = c00 + fy * (c10 - c00);
    let c1 = c01 + fy * (c11 - c01);
    c0 + fz * (c1 - c0)
}

/// B-spline coefficients mirroring the source volume's shape. Unlike voxel
/// data, coefficients are unbounded reals.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVolume {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    data: Vec<f32>,
}

impl CoefficientVolume {
    pub fn from_parts(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        data: Vec<f32>,
    ) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::Dimension(format!(
                "coefficient data length {} does not match dims {:?}",
                data.len(),
                dims
            )));
        }
        Ok(CoefficientVolume { dims, spacing, data })
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

    pub fn world_bounds(&self) -> (Vec3, Vec3) {
        let s = self.spacing_vec();
        (
            Vec3::new(-0.5 * s.x, -0.5 * s.y, -0.5 * s.z),
            Vec3::new(
                (self.dims.0 as f64 - 0.5) * s.x,
                (self.dims.1 as f64 - 0.5) * s.y,
                (self.dims.2 as f64 - 0.5) * s.z,
            ),
        )
    }

    #[inline]
    fn fetch(&self, i: i64, j: i64, k: i64) -> f64 {
        let ci = mirror_index(i, self.dims.0);
        let cj = mirror_index(j, self.dims.1);
        let ck = mirror_index(k, self.dims.2);
        self.data[(ck * self.dims.1 + cj) * self.dims.0 + ci] as f64
    }
}

/// Reflect-without-repeat index fold, matching the prefilter's boundary
/// condition: ..., 2, 1, 0, 1, 2, ..., n-2, n-1, n-2, ...
#[inline]
fn mirror_index(mut i: i64, n: usize) -> usize {
    let last = (n - 1) as i64;
    if last == 0 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i > last {
            i = 2 * last - i;
        } else {
            return i as usize;
        }
    }
}

/// Cubic B-spline basis weights for the four coefficients around a sample at
/// fractional offset `f` in `[0, 1)`. The weights sum to one.
#[inline]
pub fn bspline_weights(f: f64) -> [f64; 4] {
    let f2 = f * f;
    let f3 = f2 * f;
    let one = 1.0 - f;
    [
        one * one * one / 6.0,
        (4.0 - 6.0 * f2 + 3.0 * f3) / 6.0,
        (1.0 + 3.0 * f + 3.0 * f2 - 3.0 * f3) / 6.0,
        f3 / 6.0,
    ]
}

/// In-place single-pole causal/anticausal filtering of one line, converting
/// samples into interpolating B-spline coefficients. Mirror boundaries; the
/// causal init sum is truncated at [`prefilter_init_horizon`] terms on long
/// lines and evaluated exactly on short ones.
pub fn bspline_filter_line(line: &mut [f64]) {
    let n = line.len();
    if n < 2 {
        return;
    }
    let z = BSPLINE_POLE;
    for v in line.iter_mut() {
        *v *= BSPLINE_GAIN;
    }

    // causal initialization
    let horizon = prefilter_init_horizon();
    line[0] = if horizon < n {
        let mut zn = z;
        let mut sum = line[0];
        for &v in line.iter().take(horizon).skip(1) {
            sum += zn * v;
            zn *= z;
        }
        sum
    } else {
        // exact mirror-boundary initialization for short lines
        let mut zn = z;
        let iz = 1.0 / z;
        let mut z2n = libm::pow(z, (n - 1) as f64);
        let mut sum = line[0] + z2n * line[n - 1];
        z2n = z2n * z2n * iz;
        for &v in line.iter().take(n - 1).skip(1) {
            sum += (zn + z2n) * v;
            zn *= z;
            z2n *= iz;
        }
        sum / (1.0 - libm::pow(z, (2 * n - 2) as f64))
    };

    for i in 1..n {
        line[i] += z * line[i - 1];
    }

    // anticausal initialization and sweep
    line[n - 1] = (z / (z * z - 1.0)) * (z * line[n - 2] + line[n - 1]);
    for i in (0..n - 1).rev() {
        line[i] = z * (line[i + 1] - line[i]);
    }
}

/// Number of 1D lines a volume holds along the given axis (0 = x, 1 = y,
/// 2 = z).
pub fn line_count(dims: (usize, usize, usize), axis: usize) -> usize {
    let (nx, ny, nz) = dims;
    match axis {
        0 => ny * nz,
        1 => nx * nz,
        _ => nx * ny,
    }
}

/// Start offset and stride of the `line`-th line along `axis` in the flat
/// x-fastest layout.
pub fn line_layout(dims: (usize, usize, usize), axis: usize, line: usize) -> (usize, usize, usize) {
    let (nx, ny, nz) = dims;
    match axis {
        0 => (line * nx, 1, nx),
        1 => {
            let k = line / nx;
            let i = line % nx;
            (k * nx * ny + i, nx, ny)
        }
        _ => (line, nx * ny, nz),
    }
}

/// Run one prefilter pass over every line of `axis`, gathering each strided
/// line into `buf`, filtering in f64, and scattering back to f32 storage.
pub fn prefilter_axis_pass(data: &mut [f32], dims: (usize, usize, usize), axis: usize, buf: &mut Vec<f64>) {
    for line in 0..line_count(dims, axis) {
        let (start, stride, len) = line_layout(dims, axis, line);
        buf.clear();
        buf.extend((0..len).map(|s| data[start + s * stride] as f64));
        bspline_filter_line(buf);
        for (s, &v) in buf.iter().enumerate() {
            data[start + s * stride] = v as f32;
        }
    }
}

/// Compute interpolating tricubic B-spline coefficients by separable
/// recursive filtering along x, then y, then z.
pub fn prefilter_bspline_coefficients(vol: &ScalarVolume) -> Result<CoefficientVolume> {
    let dims = vol.dims();
    if dims.0 < 2 || dims.1 < 2 || dims.2 < 2 {
        return Err(Error::Parameter(format!(
            "prefilter requires every axis length >= 2, got {dims:?}"
        )));
    }
    let mut data: Vec<f32> = vol.data().to_vec();
    let mut buf = Vec::new();
    for axis in 0..3 {
        prefilter_axis_pass(&mut data, dims, axis, &mut buf);
    }
    CoefficientVolume::from_parts(dims, vol.spacing(), data)
}

/// Evaluate the cubic B-spline expansion at `p` (voxel space): a 4x4x4
/// weighted sum of coefficients. The result is not clamped; classification
/// clamps into `[0, 1]` later, so overshoot remains observable here.
pub fn sample_tricubic_bspline(coeffs: &CoefficientVolume, p: Vec3) -> f64 {
    let (nx, ny, nz) = coeffs.dims();
    let cx = p.x.clamp(0.0, (nx - 1) as f64);
    let cy = p.y.clamp(0.0, (ny - 1) as f64);
    let cz = p.z.clamp(0.0, (nz - 1) as f64);
    let ix = libm::floor(cx);
    let iy = libm::floor(cy);
    let iz = libm::floor(cz);
    let wx = bspline_weights(cx - ix);
    let wy = bspline_weights(cy - iy);
    let wz = bspline_weights(cz - iz);
    let (i, j, k) = (ix as i64, iy as i64, iz as i64);

    let mut acc = 0.0;
    for (dk, wk) in wz.iter().enumerate() {
        let mut plane = 0.0;
        for (dj, wj) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (di, wi) in wx.iter().enumerate() {
                row += wi * coeffs.fetch(i + di as i64 - 1, j + dj as i64 - 1, k + dk as i64 - 1);
            }
            plane += wj * row;
        }
        acc += wk * plane;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{make_phantom, Axis, PhantomKind, PhantomSpec};
    use proptest::prelude::*;

    const UNIT: (f64, f64, f64) = (1.0, 1.0, 1.0);

    fn ramp_volume(dims: (usize, usize, usize)) -> ScalarVolume {
        // f(i, j, k) = 0.01 (i + 2j + 3k), trilinear in the indices
        let (nx, ny, nz) = dims;
        let mut data = Vec::new();
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    data.push((0.01 * (i as f64 + 2.0 * j as f64 + 3.0 * k as f64)) as f32);
                }
            }
        }
        ScalarVolume::new(dims, UNIT, data).unwrap()
    }

    #[test]
    fn horizon_matches_the_tolerance_formula() {
        assert_eq!(prefilter_init_horizon(), 14);
    }

    #[test]
    fn pole_constant_is_sqrt3_minus_2() {
        assert!((BSPLINE_POLE - (libm::sqrt(3.0) - 2.0)).abs() < 1e-15);
        // gain = (1 - z)(1 - 1/z)
        let gain = (1.0 - BSPLINE_POLE) * (1.0 - 1.0 / BSPLINE_POLE);
        assert!((gain - BSPLINE_GAIN).abs() < 1e-12);
    }

    #[test]
    fn nearest_rounds_half_up() {
        let vol = ramp_volume((8, 8, 8));
        let at = |x: f64, y: f64, z: f64| sample_nearest(&vol, Vec3::new(x, y, z));
        assert_eq!(at(3.0, 2.0, 1.0), vol.voxel_fetch(3, 2, 1));
        assert_eq!(at(3.4, 2.0, 1.0), vol.voxel_fetch(3, 2, 1));
        assert_eq!(at(3.5, 2.0, 1.0), vol.voxel_fetch(4, 2, 1));
        // outside the grid clamps to the edge voxel
        assert_eq!(at(-4.0, 2.0, 1.0), vol.voxel_fetch(0, 2, 1));
        assert_eq!(at(99.0, 2.0, 1.0), vol.voxel_fetch(7, 2, 1));
    }

    #[test]
    fn trilinear_reproduces_grid_and_midpoints() {
        let vol = ramp_volume((8, 8, 8));
        assert_eq!(sample_trilinear(&vol, Vec3::new(2.0, 3.0, 4.0)), vol.voxel_fetch(2, 3, 4));
        let mid = sample_trilinear(&vol, Vec3::new(2.5, 3.0, 4.0));
        let expect = 0.5 * (vol.voxel_fetch(2, 3, 4) + vol.voxel_fetch(3, 3, 4));
        assert!((mid - expect).abs() < 1e-12);
    }

    #[test]
    fn trilinear_reproduces_trilinear_fields() {
        let vol = ramp_volume((16, 16, 16));
        // deterministic pseudo-random interior points
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let p = Vec3::new(1.0 + 13.0 * next(), 1.0 + 13.0 * next(), 1.0 + 13.0 * next());
            let expect = 0.01 * (p.x + 2.0 * p.y + 3.0 * p.z);
            let got = sample_trilinear(&vol, p);
            assert!(
                (got - expect).abs() < 1e-6,
                "at {p:?}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn constant_volume_keeps_constant_coefficients() {
        let spec = PhantomSpec::hard(PhantomKind::Constant { value: 0.3 });
        let vol = make_phantom(&spec, (9, 7, 5), UNIT).unwrap();
        let coeffs = prefilter_bspline_coefficients(&vol).unwrap();
        for &c in coeffs.data() {
            assert!((c - 0.3).abs() < 1e-6, "coefficient {c}");
        }
        // partition of unity: any sample reproduces the constant
        let v = sample_tricubic_bspline(&coeffs, Vec3::new(3.7, 2.2, 1.9));
        assert!((v - 0.3).abs() < 1e-6);
    }

    #[test]
    fn tricubic_interpolates_the_grid_samples() {
        let spec = PhantomSpec::smooth(
            PhantomKind::SphereShell {
                center: [7.5, 7.5, 7.5],
                inner_radius: 2.0,
                outer_radius: 6.0,
                interior_value: 0.2,
                shell_value: 0.85,
            },
            2.0,
        );
        let vol = make_phantom(&spec, (16, 16, 16), UNIT).unwrap();
        let coeffs = prefilter_bspline_coefficients(&vol).unwrap();
        let mut worst = 0.0f64;
        for k in 0..16 {
            for j in 0..16 {
                for i in 0..16 {
                    let v = sample_tricubic_bspline(&coeffs, Vec3::new(i as f64, j as f64, k as f64));
                    worst = worst.max((v - vol.voxel_fetch(i as i64, j as i64, k as i64)).abs());
                }
            }
        }
        assert!(worst < 1e-5, "worst grid reproduction error {worst}");
    }

    #[test]
    fn tricubic_reproduces_cubic_polynomials_in_the_interior() {
        // per-axis-degree-3 polynomial kept inside [0, 1]
        let n = 32usize;
        let axis_poly = |t: f64| {
            let u = t / (n - 1) as f64;
            0.55 + 0.4 * u - 0.45 * u * u + 0.3 * u * u * u
        };
        let f = |x: f64, y: f64, z: f64| axis_poly(x) * axis_poly(y) * axis_poly(z);
        let mut data = Vec::new();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data.push(f(i as f64, j as f64, k as f64) as f32);
                }
            }
        }
        let vol = ScalarVolume::new((n, n, n), UNIT, data).unwrap();
        let coeffs = prefilter_bspline_coefficients(&vol).unwrap();

        let mut state = 0x853c49e6748fea9bu64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        // brute-force pointwise comparison away from a 4-voxel boundary margin
        let lo = 4.0;
        let hi = (n - 1) as f64 - 4.0;
        let mut worst = 0.0f64;
        for _ in 0..300 {
            let p = Vec3::new(
                lo + (hi - lo) * next(),
                lo + (hi - lo) * next(),
                lo + (hi - lo) * next(),
            );
            let got = sample_tricubic_bspline(&coeffs, p);
            worst = worst.max((got - f(p.x, p.y, p.z)).abs());
        }
        assert!(worst < 1e-4, "worst interior polynomial error {worst}");
    }

    #[test]
    fn tube_profile_is_smoother_with_tricubic() {
        // cross a one-voxel tube at 45 degrees to the grid; the tricubic
        // profile must bend less sharply than the trilinear one
        let spec = PhantomSpec::hard(PhantomKind::Tube {
            axis: Axis::Z,
            center: [16.0, 16.0],
            radius: 0.5,
            value: 1.0,
        });
        let vol = make_phantom(&spec, (32, 32, 32), UNIT).unwrap();
        let coeffs = prefilter_bspline_coefficients(&vol).unwrap();

        let step = 0.05;
        let half = (8.0 / step) as i64;
        let dir = core::f64::consts::FRAC_1_SQRT_2;
        let profile = |tricubic: bool| -> Vec<f64> {
            (-half..=half)
                .map(|s| {
                    let u = s as f64 * step;
                    let p = Vec3::new(16.0 + u * dir, 16.0 + u * dir, 16.0);
                    if tricubic {
                        sample_tricubic_bspline(&coeffs, p)
                    } else {
                        sample_trilinear(&vol, p)
                    }
                })
                .collect()
        };
        let max_second_diff = |prof: &[f64]| {
            prof.windows(3)
                .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
                .fold(0.0f64, f64::max)
        };
        let tri = max_second_diff(&profile(false));
        let cub = max_second_diff(&profile(true));
        assert!(cub < tri, "tricubic {cub} should bend less than trilinear {tri}");
    }

    #[test]
    fn short_axis_is_rejected() {
        let vol = ScalarVolume::new((1, 4, 4), UNIT, vec![0.5f32; 16]).unwrap();
        assert!(matches!(
            prefilter_bspline_coefficients(&vol),
            Err(Error::Parameter(_))
        ));
    }

    proptest! {
        #[test]
        fn bspline_weights_partition_unity(f in 0.0f64..1.0) {
            let w = bspline_weights(f);
            let sum: f64 = w.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn trilinear_stays_within_neighbor_bounds(
            x in 0.0f64..7.0,
            y in 0.0f64..7.0,
            z in 0.0f64..7.0,
        ) {
            let spec = PhantomSpec::smooth(
                PhantomKind::SphereShell {
                    center: [3.5, 3.5, 3.5],
                    inner_radius: 1.0,
                    outer_radius: 3.0,
                    interior_value: 0.1,
                    shell_value: 0.9,
                },
                1.0,
            );
            let vol = make_phantom(&spec, (8, 8, 8), UNIT).unwrap();
            let (i, j, k) = (libm::floor(x) as i64, libm::floor(y) as i64, libm::floor(z) as i64);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for dk in 0..2 {
                for dj in 0..2 {
                    for di in 0..2 {
                        let v = vol.voxel_fetch(i + di, j + dj, k + dk);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
            let v = sample_trilinear(&vol, Vec3::new(x, y, z));
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
