//! Synthetic IMU and stereo camera.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use xrsim_core::geometry::Vec3;
use xrsim_core::image::GrayImage;
use xrsim_core::Timestamp;

use crate::trajectory::TrajectorySpec;
use crate::types::ImuSample;

/// Per-axis white-noise standard deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuNoise {
    /// rad/s
    pub gyro_sigma: f64,
    /// m/s²
    pub accel_sigma: f64,
}

pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian3(rng: &mut ChaCha8Rng, sigma: f64) -> Vec3 {
    if sigma <= 0.0 {
        return Vec3::zeros();
    }
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng))
}

/// Ideal body-frame IMU reading at `t` plus Gaussian noise.
///
/// The accelerometer measures specific force `Rᵀ(a_world − g)`. Noise is
/// seeded from `(spec.seed, t)`, so the result is a pure function of its
/// arguments.
pub fn sample_imu(spec: &TrajectorySpec, t: Timestamp, noise: &ImuNoise) -> ImuSample {
    let k = spec.kinematics(t.as_secs_f64());
    let specific_force = k.orientation.inverse() * (k.acceleration - spec.gravity());
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, t.as_nanos()));
    ImuSample {
        ts: t,
        angular_velocity: k.angular_velocity + gaussian3(&mut rng, noise.gyro_sigma),
        linear_acceleration: specific_force + gaussian3(&mut rng, noise.accel_sigma),
    }
}

/// Reading as reported by the device: gyro in deg/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawImuReading {
    pub ts: Timestamp,
    pub gyro_deg_per_s: Vec3,
    pub accel: Vec3,
}

impl RawImuReading {
    /// Converts to the rad/s convention used everywhere downstream.
    pub fn into_sample(self) -> ImuSample {
        ImuSample {
            ts: self.ts,
            angular_velocity: self.gyro_deg_per_s.map(f64::to_radians),
            linear_acceleration: self.accel,
        }
    }
}

/// Simulated IMU device producing deg/s gyro readings.
#[derive(Clone, Debug)]
pub struct ImuDevice {
    spec: TrajectorySpec,
    noise: ImuNoise,
}

impl ImuDevice {
    pub fn new(spec: TrajectorySpec, noise: ImuNoise) -> Self {
        Self { spec, noise }
    }

    pub fn read(&self, t: Timestamp) -> RawImuReading {
        let s = sample_imu(&self.spec, t, &self.noise);
        RawImuReading {
            ts: t,
            gyro_deg_per_s: s.angular_velocity.map(f64::to_degrees),
            accel: s.linear_acceleration,
        }
    }
}

/// Stereo grayscale pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraFrame {
    pub ts: Timestamp,
    pub left: GrayImage,
    pub right: GrayImage,
}

impl CameraFrame {
    /// Procedural checkerboard with seed-hashed noise; the right image is
    /// the left shifted by a fixed disparity.
    pub fn synthesize(seed: u64, ts: Timestamp, width: usize, height: usize) -> Self {
        const DISPARITY: usize = 3;
        let frame_seed = mix_seed(seed, ts.as_nanos());
        let texel = |x: usize, y: usize| -> u8 {
            let checker = if ((x / 8) + (y / 8)).is_multiple_of(2) { 170u64 } else { 70 };
            let n = mix_seed(frame_seed, (y * 65_536 + x) as u64) % 41;
            (checker + n - 20) as u8
        };
        let mut left = GrayImage::new(width, height);
        let mut right = GrayImage::new(width, height);
        for y in 0..height {
            for x in 0..width {
                left.put(x, y, texel(x, y));
                right.put(x, y, texel(x + DISPARITY, y));
            }
        }
        Self { ts, left, right }
    }
}
