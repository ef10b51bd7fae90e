//! Stand-in for a visual-inertial odometry front end.
//!
//! The proxy ignores pixels. It returns the ground-truth pose at the frame
//! timestamp, perturbed by white noise and by drift that grows linearly with
//! time: position drifts at `drift_rate` m/s along a seed-chosen direction,
//! and yaw drifts at `yaw_drift_deg_per_s`. The estimate carries the frame
//! timestamp but only becomes available `latency_ms` later.

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};
use xrsim_core::geometry::{Pose, Quat, Vec3};
use xrsim_core::nalgebra::Vector3;
use xrsim_core::Timestamp;

use crate::error::PerceptionError;
use crate::sensors::{mix_seed, CameraFrame};
use crate::types::{PoseSample, PoseSource};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VioConfig {
    pub latency_ms: f64,
    /// Per-axis position noise, m.
    pub pos_sigma: f64,
    /// Per-axis rotation noise, degrees.
    pub rot_sigma_deg: f64,
    /// Position drift speed, m/s.
    pub drift_rate: f64,
    pub yaw_drift_deg_per_s: f64,
    pub seed: u64,
}

impl Default for VioConfig {
    fn default() -> Self {
        Self {
            latency_ms: 50.0,
            pos_sigma: 0.0,
            rot_sigma_deg: 0.0,
            drift_rate: 0.0,
            yaw_drift_deg_per_s: 0.0,
            seed: 0,
        }
    }
}

impl VioConfig {
    pub fn latency(&self) -> Duration {
        Duration::from_nanos((self.latency_ms.max(0.0) * 1e6).round() as u64)
    }

    pub fn validate(&self) -> Result<(), String> {
        let vals = [
            self.latency_ms,
            self.pos_sigma,
            self.rot_sigma_deg,
            self.drift_rate,
            self.yaw_drift_deg_per_s,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err("vio parameters must be finite".into());
        }
        if self.latency_ms < 0.0 || self.pos_sigma < 0.0 || self.rot_sigma_deg < 0.0 || self.drift_rate < 0.0 {
            return Err("vio latency, noise and drift rate must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VioEstimate {
    pub sample: PoseSample,
    /// When the estimate may be published.
    pub available_at: Timestamp,
}

pub struct VioProxy {
    cfg: VioConfig,
    rng: ChaCha8Rng,
    drift_direction: Vec3,
}

impl VioProxy {
    pub fn new(cfg: VioConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0x0056_494f));
        let [x, y, z]: [f64; 3] = UnitSphere.sample(&mut rng);
        Self {
            cfg,
            rng,
            drift_direction: Vec3::new(x, y, z),
        }
    }

    pub fn config(&self) -> &VioConfig {
        &self.cfg
    }

    pub fn drift_direction(&self) -> Vec3 {
        self.drift_direction
    }

    pub fn estimate(&mut self, frame: &CameraFrame, gt: &PoseSample) -> Result<VioEstimate, PerceptionError> {
        if frame.ts != gt.ts {
            return Err(PerceptionError::Input(format!(
                "ground truth at {} does not match frame at {}",
                gt.ts, frame.ts
            )));
        }
        let t = frame.ts.as_secs_f64();
        let drift_velocity = self.drift_direction * self.cfg.drift_rate;
        let mut position = gt.pose.position + drift_velocity * t;
        if self.cfg.pos_sigma > 0.0 {
            let n = Normal::new(0.0, self.cfg.pos_sigma).expect("finite sigma");
            position += Vec3::new(n.sample(&mut self.rng), n.sample(&mut self.rng), n.sample(&mut self.rng));
        }
        let yaw_drift = Quat::from_axis_angle(&Vector3::z_axis(), (self.cfg.yaw_drift_deg_per_s * t).to_radians());
        let mut orientation = yaw_drift * gt.pose.orientation;
        if self.cfg.rot_sigma_deg > 0.0 {
            let n = Normal::new(0.0, self.cfg.rot_sigma_deg.to_radians()).expect("finite sigma");
            let rv = Vec3::new(n.sample(&mut self.rng), n.sample(&mut self.rng), n.sample(&mut self.rng));
            orientation *= Quat::from_scaled_axis(rv);
        }
        let sample = PoseSample::new(
            Pose::new(position, orientation),
            frame.ts,
            PoseSource::Vio,
            gt.linear_velocity + drift_velocity,
        );
        Ok(VioEstimate {
            sample,
            available_at: frame.ts + self.cfg.latency(),
        })
    }
}
