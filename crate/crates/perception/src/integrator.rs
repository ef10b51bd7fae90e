//! RK4 strapdown integration of IMU samples from a pose anchor.
//!
//! State is (p, v, q) with q̇ = ½ q ⊗ (0, ω), v̇ = R(q) a + g and ṗ = v.
//! Each interval between consecutive knots gets one classical RK4 step; the
//! midpoint measurement is the linear interpolation of the two knot samples.
//! The knots are the anchor time, every sample, and `t_end`. The first and
//! last samples are held flat across the gaps at either end.

use xrsim_core::geometry::{Pose, Quat, Vec3};
use xrsim_core::nalgebra::{Quaternion, UnitQuaternion};
use xrsim_core::Timestamp;

use crate::error::PerceptionError;
use crate::types::{ImuSample, PoseSample, PoseSource};

#[derive(Clone, Copy)]
struct State {
    p: Vec3,
    v: Vec3,
    q: Quaternion<f64>,
}

#[derive(Clone, Copy)]
struct Measurement {
    omega: Vec3,
    accel: Vec3,
}

impl Measurement {
    fn of(s: &ImuSample) -> Self {
        Self {
            omega: s.angular_velocity,
            accel: s.linear_acceleration,
        }
    }

    fn lerp(&self, other: &Self, f: f64) -> Self {
        Self {
            omega: self.omega.lerp(&other.omega, f),
            accel: self.accel.lerp(&other.accel, f),
        }
    }
}

fn derivative(s: &State, m: &Measurement, gravity: &Vec3) -> State {
    let omega = Quaternion::from_imag(m.omega);
    let q_dot = s.q * omega * 0.5;
    let rot = UnitQuaternion::from_quaternion(s.q);
    State {
        p: s.v,
        v: rot * m.accel + gravity,
        q: q_dot,
    }
}

fn axpy(s: &State, h: f64, d: &State) -> State {
    State {
        p: s.p + d.p * h,
        v: s.v + d.v * h,
        q: s.q + d.q * h,
    }
}

fn rk4_step(s: &State, h: f64, m0: &Measurement, m1: &Measurement, gravity: &Vec3) -> State {
    let mid = m0.lerp(m1, 0.5);
    let k1 = derivative(s, m0, gravity);
    let k2 = derivative(&axpy(s, h / 2.0, &k1), &mid, gravity);
    let k3 = derivative(&axpy(s, h / 2.0, &k2), &mid, gravity);
    let k4 = derivative(&axpy(s, h, &k3), m1, gravity);
    let w = h / 6.0;
    State {
        p: s.p + (k1.p + k2.p * 2.0 + k3.p * 2.0 + k4.p) * w,
        v: s.v + (k1.v + k2.v * 2.0 + k3.v * 2.0 + k4.v) * w,
        q: (s.q + (k1.q + k2.q * 2.0 + k3.q * 2.0 + k4.q) * w).normalize(),
    }
}

/// Integrates `imu` forward from `anchor` and returns the pose at `t_end`.
///
/// Samples must be strictly increasing in time, none earlier than the
/// anchor, and `t_end` must not precede the last sample. With no samples the
/// only valid horizon is the anchor itself.
pub fn rk4_integrate(
    anchor: &PoseSample,
    imu: &[ImuSample],
    t_end: Timestamp,
    gravity: Vec3,
) -> Result<PoseSample, PerceptionError> {
    if t_end < anchor.ts {
        return Err(PerceptionError::Input(format!(
            "t_end {} precedes anchor {}",
            t_end, anchor.ts
        )));
    }
    if let Some(first) = imu.first() {
        if first.ts < anchor.ts {
            return Err(PerceptionError::Input(format!(
                "imu sample at {} precedes anchor {}",
                first.ts, anchor.ts
            )));
        }
    }
    if let Some(i) = imu.windows(2).position(|w| w[1].ts <= w[0].ts) {
        return Err(PerceptionError::Input(format!(
            "imu samples out of order at index {}",
            i + 1
        )));
    }
    if let Some(last) = imu.last() {
        if t_end < last.ts {
            return Err(PerceptionError::Input(format!(
                "t_end {} precedes last imu sample {}",
                t_end, last.ts
            )));
        }
    }
    if imu.is_empty() && t_end > anchor.ts {
        return Err(PerceptionError::Input(
            "no imu samples to integrate over a non-empty interval".into(),
        ));
    }

    let mut out = *anchor;
    out.source = PoseSource::Integrator;
    out.ts = t_end;
    if t_end == anchor.ts {
        return Ok(out);
    }

    let mut knots: Vec<(Timestamp, Measurement)> = Vec::with_capacity(imu.len() + 2);
    if imu[0].ts > anchor.ts {
        knots.push((anchor.ts, Measurement::of(&imu[0])));
    }
    knots.extend(imu.iter().map(|s| (s.ts, Measurement::of(s))));
    let last = imu[imu.len() - 1];
    if t_end > last.ts {
        knots.push((t_end, Measurement::of(&last)));
    }

    let mut state = State {
        p: anchor.pose.position,
        v: anchor.linear_velocity,
        q: anchor.pose.orientation.into_inner(),
    };
    for w in knots.windows(2) {
        let (t0, m0) = w[0];
        let (t1, m1) = w[1];
        let h = (t1.as_nanos() - t0.as_nanos()) as f64 * 1e-9;
        state = rk4_step(&state, h, &m0, &m1, &gravity);
    }

    out.pose = Pose::new(state.p, Quat::new_unchecked(state.q));
    out.linear_velocity = state.v;
    Ok(out)
}

/// Keeps the latest VIO anchor and the IMU samples since it, and
/// re-integrates from the anchor on every query.
#[derive(Clone, Debug)]
pub struct ImuIntegrator {
    gravity: Vec3,
    anchor: Option<PoseSample>,
    samples: Vec<ImuSample>,
}

impl ImuIntegrator {
    pub fn new(gravity: Vec3) -> Self {
        Self {
            gravity,
            anchor: None,
            samples: Vec::new(),
        }
    }

    pub fn anchor(&self) -> Option<&PoseSample> {
        self.anchor.as_ref()
    }

    pub fn buffered(&self) -> usize {
        self.samples.len()
    }

    /// Installs a new anchor. Anchors older than the current one are ignored
    /// and `false` is returned.
    pub fn set_anchor(&mut self, anchor: PoseSample) -> bool {
        if let Some(cur) = &self.anchor {
            if anchor.ts < cur.ts {
                return false;
            }
        }
        // Keep one sample at or before the anchor for interpolation.
        let keep_from = self
            .samples
            .iter()
            .rposition(|s| s.ts <= anchor.ts)
            .unwrap_or(0);
        self.samples.drain(..keep_from);
        self.anchor = Some(anchor);
        true
    }

    /// Appends a sample. Samples must arrive in increasing time order.
    pub fn push_imu(&mut self, sample: ImuSample) -> Result<(), PerceptionError> {
        if let Some(last) = self.samples.last() {
            if sample.ts <= last.ts {
                return Err(PerceptionError::Input(format!(
                    "imu sample at {} does not follow {}",
                    sample.ts, last.ts
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    /// Pose at `t`, integrated from the current anchor. `None` until an
    /// anchor has been set.
    pub fn pose_at(&self, t: Timestamp) -> Result<Option<PoseSample>, PerceptionError> {
        let Some(anchor) = self.anchor else {
            return Ok(None);
        };
        let mut window: Vec<ImuSample> = Vec::new();
        let start = self.samples.partition_point(|s| s.ts < anchor.ts);
        let exact = self.samples.get(start).is_some_and(|s| s.ts == anchor.ts);
        if start > 0 && !exact && t > anchor.ts {
            let before = self.samples[start - 1];
            let at_anchor = match self.samples.get(start) {
                Some(after) => {
                    let span = (after.ts.as_nanos() - before.ts.as_nanos()) as f64;
                    let f = (anchor.ts.as_nanos() - before.ts.as_nanos()) as f64 / span;
                    ImuSample {
                        ts: anchor.ts,
                        angular_velocity: before.angular_velocity.lerp(&after.angular_velocity, f),
                        linear_acceleration: before
                            .linear_acceleration
                            .lerp(&after.linear_acceleration, f),
                    }
                }
                None => ImuSample {
                    ts: anchor.ts,
                    ..before
                },
            };
            window.push(at_anchor);
        }
        window.extend(self.samples[start..].iter().take_while(|s| s.ts <= t));
        rk4_integrate(&anchor, &window, t.max(anchor.ts), self.gravity).map(Some)
    }
}
