//! Pinhole camera. Pixel coordinates have (0, 0) at the center of the top
//! left pixel, so the principal point of a centered camera is
//! `((w - 1) / 2, (h - 1) / 2)`.
//!
//! The camera frame is x right, y down, z forward. It relates to the body
//! frame (x forward, y left, z up) by `cam = (-y_b, -z_b, x_b)`.

use serde::{Deserialize, Serialize};
use xrsim_core::nalgebra::{Matrix3, Vector3};

use crate::error::VisualError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub width: usize,
    pub height: usize,
    /// Horizontal field of view, degrees.
    pub fov_deg: f64,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraModel {
    /// Square-pixel camera with the given horizontal field of view,
    /// principal point at the image center.
    pub fn from_fov(width: usize, height: usize, fov_deg: f64) -> Self {
        let f = (width as f64 / 2.0) / (fov_deg.to_radians() / 2.0).tan();
        Self {
            width,
            height,
            fov_deg,
            fx: f,
            fy: f,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), VisualError> {
        if self.width == 0 || self.height == 0 {
            return Err(VisualError::Input("camera resolution must be nonzero".into()));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(VisualError::Input(format!("field of view {} out of (0, 180)", self.fov_deg)));
        }
        if !(self.fx > 0.0 && self.fy > 0.0) || !self.fx.is_finite() || !self.fy.is_finite() {
            return Err(VisualError::Input("focal lengths must be positive".into()));
        }
        let inside = |c: f64, n: usize| c >= 0.0 && c <= n as f64 - 1.0;
        if !inside(self.cx, self.width) || !inside(self.cy, self.height) {
            return Err(VisualError::Input("principal point outside the image".into()));
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn intrinsics_inverse(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.fx,
            0.0,
            -self.cx / self.fx,
            0.0,
            1.0 / self.fy,
            -self.cy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Ray direction (camera frame, z = 1) through pixel `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Same camera at a different resolution, keeping the field of view.
    pub fn scaled(&self, width: usize, height: usize) -> Self {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        Self {
            width,
            height,
            fov_deg: self.fov_deg,
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: (self.cx + 0.5) * sx - 0.5,
            cy: (self.cy + 0.5) * sy - 0.5,
        }
    }
}

/// Rotation taking body-frame vectors to camera-frame vectors.
pub fn body_to_camera() -> Matrix3<f64> {
    Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ninety_degree_fov_puts_edges_at_unit_tangent() {
        let cam = CameraModel::from_fov(2560, 1440, 90.0);
        assert!((cam.fx - 1280.0).abs() < 1e-9);
        let edge = cam.unproject(-0.5, cam.cy);
        assert!((edge.x + 1.0).abs() < 1e-12);
        cam.validate().unwrap();
    }

    #[test]
    fn inverse_intrinsics() {
        let cam = CameraModel::from_fov(320, 180, 90.0);
        let id = cam.intrinsics() * cam.intrinsics_inverse();
        assert!((id - Matrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn forward_axis_maps_to_optical_axis() {
        let c = body_to_camera();
        assert_eq!(c * Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(c * Vector3::new(0.0, 1.0, 0.0), Vector3::new(-1.0, 0.0, 0.0));
        assert_eq!(c * Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn scaling_preserves_field_of_view() {
        let cam = CameraModel::from_fov(2560, 1440, 90.0).scaled(320, 180);
        let small = CameraModel::from_fov(320, 180, 90.0);
        assert!((cam.fx - small.fx).abs() < 1e-9);
        assert!((cam.cx - small.cx).abs() < 1e-9);
        assert!((cam.cy - small.cy).abs() < 1e-9);
    }
}
