//! Constant-acceleration extrapolation of the head pose to display time.

use xrsim_core::geometry::{Pose, Quat, Vec3};
use xrsim_core::Timestamp;
use xrsim_perception::PoseSample;

/// Number of most recent samples used for the position fit.
pub const HISTORY_WINDOW: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub pose: Pose,
    /// True when the history was too short or degenerate and the newest
    /// pose was returned unchanged.
    pub fallback: bool,
}

fn secs_between(a: Timestamp, b: Timestamp) -> f64 {
    (b.as_nanos() as f64 - a.as_nanos() as f64) * 1e-9
}

/// Predicts the pose at `display_ts` from `history` (oldest first).
///
/// Position: quadratic in time through the newest sample, with velocity and
/// acceleration least-squares fitted to the rest of the window. Orientation:
/// body rate from the newest delta, angular acceleration from the change
/// between the two newest deltas, integrated over the horizon.
pub fn predict_pose(history: &[PoseSample], display_ts: Timestamp) -> Prediction {
    let Some(newest) = history.last() else {
        return Prediction {
            pose: Pose::identity(),
            fallback: true,
        };
    };
    let fallback = Prediction {
        pose: newest.pose,
        fallback: true,
    };
    if history.len() < 3 {
        return fallback;
    }
    let window = &history[history.len().saturating_sub(HISTORY_WINDOW)..];
    let n = window.len();
    if window.windows(2).any(|w| w[1].ts <= w[0].ts) {
        return fallback;
    }

    let tau = secs_between(newest.ts, display_ts);
    let position = match fit_quadratic(window) {
        Some((b, c)) => newest.pose.position + b * tau + c * (tau * tau),
        None => return fallback,
    };

    let (q0, q1, q2) = (
        window[n - 3].pose.orientation,
        window[n - 2].pose.orientation,
        newest.pose.orientation,
    );
    let dt0 = secs_between(window[n - 3].ts, window[n - 2].ts);
    let dt1 = secs_between(window[n - 2].ts, newest.ts);
    let w0 = (q0.inverse() * q1).scaled_axis() / dt0;
    let w1 = (q1.inverse() * q2).scaled_axis() / dt1;
    let alpha = (w1 - w0) / ((dt0 + dt1) / 2.0);
    let theta = (w1 + alpha * (dt1 / 2.0)) * tau + alpha * (0.5 * tau * tau);
    let orientation = q2 * Quat::from_scaled_axis(theta);

    Prediction {
        pose: Pose::new(position, orientation),
        fallback: false,
    }
}

/// Least-squares `(b, c)` with `p(τ) = p_n + bτ + cτ²`, τ measured from the
/// newest sample. Times are rescaled to keep the normal equations well
/// conditioned.
fn fit_quadratic(window: &[PoseSample]) -> Option<(Vec3, Vec3)> {
    let newest = window.last()?;
    let others = &window[..window.len() - 1];
    let scale = others
        .iter()
        .map(|s| secs_between(newest.ts, s.ts).abs())
        .fold(0.0, f64::max);
    if scale <= 0.0 {
        return None;
    }
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    let (mut r1, mut r2) = (Vec3::zeros(), Vec3::zeros());
    for s in others {
        let t = secs_between(newest.ts, s.ts) / scale;
        let d = s.pose.position - newest.pose.position;
        s2 += t * t;
        s3 += t * t * t;
        s4 += t * t * t * t;
        r1 += d * t;
        r2 += d * (t * t);
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() < 1e-12 {
        return None;
    }
    let b = (r1 * s4 - r2 * s3) / det;
    let c = (r2 * s2 - r1 * s3) / det;
    Some((b / scale, c / (scale * scale)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use xrsim_perception::PoseSource;

    fn sample(ms: u64, p: Vec3, q: Quat) -> PoseSample {
        PoseSample::new(
            Pose::new(p, q),
            Timestamp::from_nanos(ms * 1_000_000),
            PoseSource::Integrator,
            Vec3::zeros(),
        )
    }

    #[test]
    fn short_history_falls_back() {
        let h = [sample(0, Vec3::zeros(), Quat::identity()), sample(2, Vec3::x(), Quat::identity())];
        let p = predict_pose(&h, Timestamp::from_nanos(10_000_000));
        assert!(p.fallback);
        assert_eq!(p.pose.position, Vec3::x());
    }

    #[test]
    fn repeated_timestamps_fall_back() {
        let h = [
            sample(0, Vec3::zeros(), Quat::identity()),
            sample(2, Vec3::zeros(), Quat::identity()),
            sample(2, Vec3::x(), Quat::identity()),
        ];
        assert!(predict_pose(&h, Timestamp::from_nanos(5_000_000)).fallback);
    }

    #[test]
    fn static_history_predicts_last_pose() {
        let q = Quat::from_euler_angles(0.1, 0.2, 0.3);
        let p = Vec3::new(1.0, 2.0, 3.0);
        let h: Vec<_> = (0..5).map(|i| sample(i * 2, p, q)).collect();
        let pred = predict_pose(&h, Timestamp::from_nanos(20_000_000));
        assert!(!pred.fallback);
        assert!((pred.pose.position - p).norm() < 1e-12);
        assert!(pred.pose.orientation.angle_to(&q) < 1e-12);
    }
}
