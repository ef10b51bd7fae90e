//! Rigid-body types shared by every pipeline.
//!
//! Quaternions are Hamilton, body-to-world, stored (w, x, y, z) at the file
//! boundary. The body frame is x forward, y left, z up.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Tolerance on |q| for a quaternion to count as unit.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(position: Vec3, orientation: Quat) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Vec3::zeros(), Quat::identity())
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.position + self.orientation * other.position,
            self.orientation * other.orientation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose::new(-(inv * self.position), inv)
    }

    /// Motion from `self` to `other`, expressed in `self`'s frame.
    pub fn delta_to(&self, other: &Pose) -> Pose {
        self.inverse().compose(other)
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.position + self.orientation * p
    }

    /// Geodesic angle between the two orientations, radians.
    pub fn rotation_angle_to(&self, other: &Pose) -> f64 {
        self.orientation.angle_to(&other.orientation)
    }
}

pub fn quat_from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Quat {
    UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z))
}

pub fn quat_to_wxyz(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

/// Yaw about +z, then pitch about the new +y.
pub fn quat_from_yaw_pitch(yaw: f64, pitch: f64) -> Quat {
    Quat::from_axis_angle(&Vector3::z_axis(), yaw) * Quat::from_axis_angle(&Vector3::y_axis(), pitch)
}

pub fn is_unit(q: &Quaternion<f64>) -> bool {
    (q.norm() - 1.0).abs() <= UNIT_NORM_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_with_inverse_is_identity() {
        let p = Pose::new(Vec3::new(1.0, -2.0, 0.5), quat_from_yaw_pitch(0.7, -0.2));
        let id = p.compose(&p.inverse());
        assert!(id.position.norm() < 1e-12);
        assert!(id.orientation.angle() < 1e-12);
    }

    #[test]
    fn delta_to_recovers_relative_motion() {
        let a = Pose::new(Vec3::new(1.0, 0.0, 0.0), quat_from_yaw_pitch(0.3, 0.0));
        let d = Pose::new(Vec3::new(0.0, 2.0, 0.0), quat_from_yaw_pitch(0.1, 0.05));
        let b = a.compose(&d);
        let got = a.delta_to(&b);
        assert!((got.position - d.position).norm() < 1e-12);
        assert!(got.orientation.angle_to(&d.orientation) < 1e-12);
    }

    #[test]
    fn wxyz_roundtrip() {
        let q = quat_from_yaw_pitch(1.2, 0.4);
        let [w, x, y, z] = quat_to_wxyz(&q);
        assert!(quat_from_wxyz(w, x, y, z).angle_to(&q) < 1e-15);
        assert!(is_unit(q.quaternion()));
    }
}
