//! Closed-form head trajectories.
//!
//! Position follows a horizontal circle with an optional vertical bob.
//! Orientation is a yaw (about world z) followed by a pitch (about the new
//! y axis); yaw is an offset plus a constant rate plus a sinusoid, pitch is
//! a sinusoid. Everything is analytic, so position, velocity, acceleration,
//! orientation and body angular velocity are exact at any instant.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use xrsim_core::geometry::{quat_from_yaw_pitch, Pose, Quat, Vec3};
use xrsim_core::Timestamp;

use crate::types::{PoseSample, PoseSource};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySpec {
    pub center: [f64; 3],
    pub radius_m: f64,
    /// Angular rate around the circle, rad/s.
    pub orbit_rate: f64,
    pub orbit_phase: f64,
    pub bob_amplitude_m: f64,
    pub bob_frequency_hz: f64,
    pub yaw_offset: f64,
    pub yaw_rate: f64,
    pub yaw_amplitude: f64,
    pub yaw_frequency_hz: f64,
    pub pitch_amplitude: f64,
    pub pitch_frequency_hz: f64,
    pub gravity: [f64; 3],
    pub seed: u64,
}

impl Default for TrajectorySpec {
    /// A slow walk around a 1 m circle, facing along the direction of travel,
    /// with mild head wobble.
    fn default() -> Self {
        Self {
            center: [0.0, 0.0, 1.6],
            radius_m: 1.0,
            orbit_rate: 0.5,
            orbit_phase: 0.0,
            bob_amplitude_m: 0.03,
            bob_frequency_hz: 0.8,
            yaw_offset: std::f64::consts::FRAC_PI_2,
            yaw_rate: 0.5,
            yaw_amplitude: 0.25,
            yaw_frequency_hz: 0.3,
            pitch_amplitude: 0.1,
            pitch_frequency_hz: 0.2,
            gravity: [0.0, 0.0, -9.81],
            seed: 0,
        }
    }
}

impl TrajectorySpec {
    /// Standing still at `center`, looking along +x.
    pub fn stationary() -> Self {
        Self {
            radius_m: 0.0,
            orbit_rate: 0.0,
            bob_amplitude_m: 0.0,
            yaw_offset: 0.0,
            yaw_rate: 0.0,
            yaw_amplitude: 0.0,
            pitch_amplitude: 0.0,
            ..Self::default()
        }
    }

    /// Turning in place at a constant yaw rate.
    pub fn constant_yaw(rate: f64) -> Self {
        Self {
            yaw_rate: rate,
            ..Self::stationary()
        }
    }

    /// Circle of `radius` at `rate` rad/s, head locked to the direction of
    /// travel. Body-frame IMU signals are constant along this path.
    pub fn heading_locked_circle(radius: f64, rate: f64) -> Self {
        Self {
            radius_m: radius,
            orbit_rate: rate,
            yaw_offset: std::f64::consts::FRAC_PI_2,
            yaw_rate: rate,
            ..Self::stationary()
        }
    }

    pub fn gravity(&self) -> Vec3 {
        Vec3::from(self.gravity)
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.radius_m,
            self.orbit_rate,
            self.orbit_phase,
            self.bob_amplitude_m,
            self.bob_frequency_hz,
            self.yaw_offset,
            self.yaw_rate,
            self.yaw_amplitude,
            self.yaw_frequency_hz,
            self.pitch_amplitude,
            self.pitch_frequency_hz,
        ];
        if all.iter().chain(&self.center).chain(&self.gravity).any(|v| !v.is_finite()) {
            return Err("trajectory parameters must be finite".into());
        }
        if self.radius_m < 0.0 {
            return Err("radius must be non-negative".into());
        }
        if self.pitch_amplitude.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err("pitch amplitude must stay below 90 degrees".into());
        }
        Ok(())
    }

    /// Full kinematic state at `t` seconds.
    pub fn kinematics(&self, t: f64) -> Kinematics {
        let r = self.radius_m;
        let w = self.orbit_rate;
        let theta = self.orbit_phase + w * t;
        let (s, c) = theta.sin_cos();
        let wb = TAU * self.bob_frequency_hz;
        let (sb, cb) = (wb * t).sin_cos();
        let ab = self.bob_amplitude_m;
        let [cx, cy, cz] = self.center;

        let position = Vec3::new(cx + r * c, cy + r * s, cz + ab * sb);
        let velocity = Vec3::new(-r * w * s, r * w * c, ab * wb * cb);
        let acceleration = Vec3::new(-r * w * w * c, -r * w * w * s, -ab * wb * wb * sb);

        let wy = TAU * self.yaw_frequency_hz;
        let yaw = self.yaw_offset + self.yaw_rate * t + self.yaw_amplitude * (wy * t).sin();
        let yaw_dot = self.yaw_rate + self.yaw_amplitude * wy * (wy * t).cos();
        let wp = TAU * self.pitch_frequency_hz;
        let pitch = self.pitch_amplitude * (wp * t).sin();
        let pitch_dot = self.pitch_amplitude * wp * (wp * t).cos();

        let orientation = quat_from_yaw_pitch(yaw, pitch);
        let (sp, cp) = pitch.sin_cos();
        let angular_velocity = Vec3::new(-yaw_dot * sp, pitch_dot, yaw_dot * cp);

        Kinematics {
            position,
            velocity,
            acceleration,
            orientation,
            angular_velocity,
        }
    }
}

/// Analytic state of the head at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kinematics {
    pub position: Vec3,
    pub velocity: Vec3,
    /// World-frame acceleration (excluding gravity).
    pub acceleration: Vec3,
    pub orientation: Quat,
    /// Body-frame angular velocity, rad/s.
    pub angular_velocity: Vec3,
}

pub fn ground_truth_pose(spec: &TrajectorySpec, t: Timestamp) -> PoseSample {
    let k = spec.kinematics(t.as_secs_f64());
    PoseSample::new(
        Pose::new(k.position, k.orientation),
        t,
        PoseSource::GroundTruth,
        k.velocity,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn start_pose_is_defined_by_the_spec() {
        let spec = TrajectorySpec::default();
        let gt = ground_truth_pose(&spec, Timestamp::ZERO);
        assert!((gt.pose.position - Vec3::new(1.0, 0.0, 1.6)).norm() < 1e-15);
        let expected = quat_from_yaw_pitch(spec.yaw_offset, 0.0);
        assert!(gt.pose.orientation.angle_to(&expected) < 1e-15);
        assert_eq!(gt.source, PoseSource::GroundTruth);
    }

    #[test]
    fn circle_is_periodic() {
        let spec = TrajectorySpec::heading_locked_circle(1.5, 2.0 * PI);
        let a = ground_truth_pose(&spec, Timestamp::ZERO);
        let b = ground_truth_pose(&spec, Timestamp::from_nanos(1_000_000_000));
        assert!((a.pose.position - b.pose.position).norm() < 1e-12);
    }

    #[test]
    fn velocity_matches_central_difference() {
        let spec = TrajectorySpec::default();
        let h = 1e-5;
        for &t in &[0.0, 0.37, 1.9, 7.25] {
            let k = spec.kinematics(t);
            let fd = (spec.kinematics(t + h).position - spec.kinematics(t - h).position) / (2.0 * h);
            assert!((k.velocity - fd).norm() < 1e-6, "t={t}");
            let fa = (spec.kinematics(t + h).velocity - spec.kinematics(t - h).velocity) / (2.0 * h);
            assert!((k.acceleration - fa).norm() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn body_rate_matches_quaternion_derivative() {
        let spec = TrajectorySpec::default();
        let h = 1e-6;
        for &t in &[0.1, 2.3, 5.0] {
            let k = spec.kinematics(t);
            let q0 = spec.kinematics(t - h).orientation.into_inner();
            let q1 = spec.kinematics(t + h).orientation.into_inner();
            let qdot = (q1 - q0) / (2.0 * h);
            // q̇ = ½ q ⊗ (0, ω)  =>  ω = 2 q⁻¹ q̇
            let omega = (k.orientation.into_inner().conjugate() * qdot) * 2.0;
            assert!(omega.w.abs() < 1e-6);
            assert!((omega.imag() - k.angular_velocity).norm() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn heading_locked_circle_has_constant_body_signals() {
        let spec = TrajectorySpec::heading_locked_circle(1.0, 0.8);
        let body_acc = |t: f64| {
            let k = spec.kinematics(t);
            k.orientation.inverse() * (k.acceleration - spec.gravity())
        };
        for t in [0.5, 1.7, 3.3] {
            assert!((body_acc(t) - body_acc(0.0)).norm() < 1e-12);
            assert!((spec.kinematics(t).angular_velocity - Vec3::new(0.0, 0.0, 0.8)).norm() < 1e-15);
        }
    }
}
