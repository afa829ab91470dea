//! Synthetic test volumes with controlled geometry and edge sharpness.
//!
//! Phantoms are deterministic: the same spec always produces bit-identical
//! volumes. Geometric parameters are expressed in voxel units. A hard edge
//! (`edge_width == 0`) maximizes sampling artifacts; a positive width
//! replaces it with a smoothstep transition of that width.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volume::ScalarVolume;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Axis> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Parameter(format!("unknown axis '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomKind {
    /// Every voxel holds the same value.
    Constant { value: f64 },
    /// Spherical shell: `interior_value` inside the inner radius,
    /// `shell_value` between the radii, background zero outside. A solid
    /// ball is a shell with `inner_radius == 0`.
    SphereShell {
        center: [f64; 3],
        inner_radius: f64,
        outer_radius: f64,
        interior_value: f64,
        shell_value: f64,
    },
    /// Infinite cylinder along a grid axis. `center` is the position in the
    /// perpendicular plane (plane axes in grid order, e.g. (x, y) for a
    /// z-aligned tube).
    Tube {
        axis: Axis,
        center: [f64; 2],
        radius: f64,
        value: f64,
    },
    /// Region between two planes perpendicular to an axis.
    Slab {
        axis: Axis,
        min: f64,
        max: f64,
        value: f64,
    },
    /// Value varies linearly along an axis from `start_value` at index 0 to
    /// `end_value` at the last index. Edge smoothing does not apply.
    LinearRamp {
        axis: Axis,
        start_value: f64,
        end_value: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    /// Smoothstep transition width in voxels; 0 keeps edges hard.
    pub edge_width: f64,
}

impl PhantomSpec {
    pub fn hard(kind: PhantomKind) -> Self {
        PhantomSpec { kind, edge_width: 0.0 }
    }

    pub fn smooth(kind: PhantomKind, edge_width: f64) -> Self {
        PhantomSpec { kind, edge_width }
    }

    fn validate(&self) -> Result<()> {
        if !(self.edge_width >= 0.0) {
            return Err(Error::Parameter(format!(
                "edge width must be >= 0, got {}",
                self.edge_width
            )));
        }
        let check_value = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!("{name} {v} outside [0, 1]")));
            }
            Ok(())
        };
        match &self.kind {
            PhantomKind::Constant { value } => check_value("constant value", *value),
            PhantomKind::SphereShell {
                inner_radius,
                outer_radius,
                interior_value,
                shell_value,
                ..
            } => {
                if !(*outer_radius > *inner_radius) {
                    return Err(Error::Parameter(format!(
                        "outer radius ({outer_radius}) must exceed inner radius ({inner_radius})"
                    )));
                }
                if *inner_radius < 0.0 {
                    return Err(Error::Parameter("inner radius must be >= 0".into()));
                }
                check_value("interior value", *interior_value)?;
                check_value("shell value", *shell_value)
            }
            PhantomKind::Tube { radius, value, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::Parameter(format!("tube radius must be > 0, got {radius}")));
                }
                check_value("tube value", *value)
            }
            PhantomKind::Slab { min, max, value, .. } => {
                if !(max > min) {
                    return Err(Error::Parameter(format!(
                        "slab max ({max}) must exceed min ({min})"
                    )));
                }
                check_value("slab value", *value)
            }
            PhantomKind::LinearRamp { start_value, end_value, .. } => {
                check_value("ramp start", *start_value)?;
                check_value("ramp end", *end_value)
            }
        }
    }
}

/// Inside weight for a signed distance (positive inside). A hard edge is the
/// indicator function; otherwise a smoothstep over `[-w/2, w/2]`.
fn edge_profile(signed_distance: f64, width: f64) -> f64 {
    if width <= 0.0 {
        return if signed_distance >= 0.0 { 1.0 } else { 0.0 };
    }
    let t = ((signed_distance + 0.5 * width) / width).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

pub fn make_phantom(
    spec: &PhantomSpec,
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
) -> Result<ScalarVolume> {
    spec.validate()?;
    let (nx, ny, nz) = dims;
    if nx < 1 || ny < 1 || nz < 1 {
        return Err(Error::Parameter(format!("dims must be >= 1, got {dims:?}")));
    }
    let w = spec.edge_width;
    let mut data = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = [i as f64, j as f64, k as f64];
                let v = match &spec.kind {
                    PhantomKind::Constant { value } => *value,
                    PhantomKind::SphereShell {
                        center,
                        inner_radius,
                        outer_radius,
                        interior_value,
                        shell_value,
                    } => {
                        let dx = p[0] - center[0];
                        let dy = p[1] - center[1];
                        let dz = p[2] - center[2];
                        let r = libm::sqrt(dx * dx + dy * dy + dz * dz);
                        let w_interior = edge_profile(inner_radius - r, w);
                        let w_shell = edge_profile(r - inner_radius, w) * edge_profile(outer_radius - r, w);
                        interior_value * w_interior + shell_value * w_shell
                    }
                    PhantomKind::Tube { axis, center, radius, value } => {
                        let (a, b) = match axis {
                            Axis::X => (p[1], p[2]),
                            Axis::Y => (p[0], p[2]),
                            Axis::Z => (p[0], p[1]),
                        };
                        let da = a - center[0];
                        let db = b - center[1];
                        let r = libm::sqrt(da * da + db * db);
                        value * edge_profile(radius - r, w)
                    }
                    PhantomKind::Slab { axis, min, max, value } => {
                        let c = match axis {
                            Axis::X => p[0],
                            Axis::Y => p[1],
                            Axis::Z => p[2],
                        };
                        let sd = (c - min).min(max - c);
                        value * edge_profile(sd, w)
                    }
                    PhantomKind::LinearRamp { axis, start_value, end_value } => {
                        let (c, n) = match axis {
                            Axis::X => (p[0], nx),
                            Axis::Y => (p[1], ny),
                            Axis::Z => (p[2], nz),
                        };
                        if n == 1 {
                            *start_value
                        } else {
                            start_value + (end_value - start_value) * c / (n - 1) as f64
                        }
                    }
                };
                data.push(v.clamp(0.0, 1.0) as f32);
            }
        }
    }
    ScalarVolume::new(dims, spacing, data)
}
