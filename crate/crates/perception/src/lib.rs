//! Perception pipeline: analytic head trajectories, synthetic IMU and
//! stereo camera sensors, a VIO stand-in with configurable noise, drift and
//! latency, and an RK4 IMU integrator that dead-reckons between VIO anchors.

pub mod error;
pub mod integrator;
pub mod record;
pub mod sensors;
pub mod trajectory;
pub mod types;
pub mod vio;

pub use error::PerceptionError;
pub use integrator::{rk4_integrate, ImuIntegrator};
pub use record::{load_trajectory, read_trajectory, save_trajectory, write_trajectory};
pub use sensors::{sample_imu, CameraFrame, ImuDevice, ImuNoise, RawImuReading};
pub use trajectory::{ground_truth_pose, Kinematics, TrajectorySpec};
pub use types::{ImuSample, PoseSample, PoseSource};
pub use vio::{VioConfig, VioEstimate, VioProxy};
