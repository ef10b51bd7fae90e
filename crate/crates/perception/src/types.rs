use serde::{Deserialize, Serialize};
use xrsim_core::geometry::{Pose, Vec3};
use xrsim_core::Timestamp;

/// One IMU reading in the body frame. Angular velocity is in rad/s; the
/// accelerometer reports specific force (reads +g upward when at rest).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub ts: Timestamp,
    pub angular_velocity: Vec3,
    pub linear_acceleration: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseSource {
    Vio,
    Integrator,
    GroundTruth,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseSample {
    pub pose: Pose,
    pub ts: Timestamp,
    pub source: PoseSource,
    pub linear_velocity: Vec3,
}

impl PoseSample {
    pub fn new(pose: Pose, ts: Timestamp, source: PoseSource, linear_velocity: Vec3) -> Self {
        Self {
            pose,
            ts,
            source,
            linear_velocity,
        }
    }
}
