//! Cameras and per-pixel ray generation.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::Vec3;

/// A ray `x(t) = origin + t * direction` with unit direction, `t` in world
/// units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Ray {
        let direction = direction.normalized();
        debug_assert!((direction.length() - 1.0).abs() < 1e-9);
        Ray { origin, direction }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Parallel rays; `height` is the world-space extent covered by the
    /// viewport vertically.
    Orthographic { height: f64 },
    /// Rays through the camera position; vertical field of view in degrees.
    Perspective { fov_y_deg: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    position: Vec3,
    projection: Projection,
    width: usize,
    height: usize,
    // orthonormal basis: right, up, forward
    right: Vec3,
    up: Vec3,
    forward: Vec3,
}

impl Camera {
    pub fn new(
        position: Vec3,
        target: Vec3,
        up_hint: Vec3,
        projection: Projection,
        width: usize,
        height: usize,
    ) -> Result<Camera> {
        if width < 1 || height < 1 {
            return Err(Error::Parameter(format!("viewport must be >= 1x1, got {width}x{height}")));
        }
        match projection {
            Projection::Orthographic { height } if !(height > 0.0) => {
                return Err(Error::Parameter(format!("orthographic height must be > 0, got {height}")));
            }
            Projection::Perspective { fov_y_deg } if !(fov_y_deg > 0.0 && fov_y_deg < 180.0) => {
                return Err(Error::Parameter(format!(
                    "field of view must lie in (0, 180) degrees, got {fov_y_deg}"
                )));
            }
            _ => {}
        }
        let view = target - position;
        if view.length() == 0.0 {
            return Err(Error::Parameter("camera target equals camera position".into()));
        }
        let forward = view.normalized();
        let cross = forward.cross(up_hint);
        if cross.length() < 1e-12 {
            return Err(Error::Parameter("up vector is parallel to the view direction".into()));
        }
        let right = cross.normalized();
        let up = right.cross(forward);
        Ok(Camera { position, projection, width, height, right, up, forward })
    }

    pub fn viewport(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Same camera with a different viewport size.
    pub fn with_viewport(&self, width: usize, height: usize) -> Result<Camera> {
        if width < 1 || height < 1 {
            return Err(Error::Parameter(format!("viewport must be >= 1x1, got {width}x{height}")));
        }
        let mut cam = self.clone();
        cam.width = width;
        cam.height = height;
        Ok(cam)
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    /// Ray through the center of pixel `(px, py)`. Pixel (0, 0) is the top
    /// left of the image; `py` grows downward.
    pub fn generate_ray(&self, px: usize, py: usize) -> Ray {
        debug_assert!(px < self.width && py < self.height, "pixel outside viewport");
        let u = 2.0 * (px as f64 + 0.5) / self.width as f64 - 1.0;
        let v = 1.0 - 2.0 * (py as f64 + 0.5) / self.height as f64;
        let aspect = self.width as f64 / self.height as f64;
        match self.projection {
            Projection::Orthographic { height } => {
                let half_h = 0.5 * height;
                let half_w = half_h * aspect;
                let origin = self.position + self.right * (u * half_w) + self.up * (v * half_h);
                Ray { origin, direction: self.forward }
            }
            Projection::Perspective { fov_y_deg } => {
                let tan_half = libm::tan(0.5 * fov_y_deg.to_radians());
                let dir = self.forward + self.right * (u * tan_half * aspect) + self.up * (v * tan_half);
                Ray::new(self.position, dir)
            }
        }
    }
}
