use std::time::Duration;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xrsim_core::geometry::{quat_from_yaw_pitch, Pose, Quat, Vec3};
use xrsim_core::Timestamp;
use xrsim_metrics::{align_trajectories, associate, ate, rpe, Alignment, PosePair, Trajectory, DEFAULT_MAX_GAP};

fn wavy(n: usize) -> Trajectory {
    Trajectory::new(
        (0..n)
            .map(|i| {
                let t = i as f64 * 0.01;
                let pos = Vec3::new(t.cos() * 2.0, (1.3 * t).sin(), 0.3 * (0.7 * t).sin() + 0.1 * t);
                (Timestamp::from_nanos(i as u64 * 10_000_000), Pose::new(pos, quat_from_yaw_pitch(t, 0.2 * t.sin())))
            })
            .collect(),
    )
    .unwrap()
}

fn transformed(traj: &Trajectory, mut f: impl FnMut(f64, &Pose) -> Pose) -> Trajectory {
    Trajectory::new(traj.samples().iter().map(|(ts, p)| (*ts, f(ts.as_secs_f64(), p))).collect()).unwrap()
}

fn pairs(est: &Trajectory, gt: &Trajectory) -> Vec<PosePair> {
    associate(est, gt, DEFAULT_MAX_GAP)
}

fn position_rmse(pairs: &[PosePair], a: &Alignment) -> f64 {
    let s: f64 = pairs.iter().map(|p| (a.apply(&p.est).position - p.gt.position).norm_squared()).sum();
    (s / pairs.len() as f64).sqrt()
}

#[test]
fn identical_trajectories_have_zero_error() {
    let gt = wavy(300);
    let p = pairs(&gt, &gt);
    let al = align_trajectories(&p, false).unwrap();
    assert!(al.rotation.angle() < 1e-9 && al.translation.norm() < 1e-9);
    let a = ate(&al.apply_pairs(&p));
    assert!(a.trans_m < 1e-9 && a.rot_deg < 1e-6);
    let r = rpe(&p, Duration::from_millis(500)).unwrap();
    assert!(r.errors.iter().all(|e| e.1 < 1e-12 && e.2 < 1e-6));
    assert_eq!(ate(&p).trans_m, 0.0);
}

#[test]
fn rigid_transform_is_recovered() {
    let gt = wavy(400);
    let q = quat_from_yaw_pitch(0.8, -0.3) * Quat::from_axis_angle(&Vec3::x_axis(), 0.4);
    let t = Vec3::new(3.0, -1.0, 0.5);
    // est = T⁻¹ gt, so the alignment taking est to gt is T.
    let est = transformed(&gt, |_, p| Pose::new(q.inverse() * (p.position - t), q.inverse() * p.orientation));
    let p = pairs(&est, &gt);
    let al = align_trajectories(&p, false).unwrap();
    assert!(al.rotation.angle_to(&q) < 1e-9);
    assert!((al.translation - t).norm() < 1e-9);
    assert!(!al.degenerate);
    let a = ate(&al.apply_pairs(&p));
    println!("post-alignment ATE {:.2e} m / {:.2e} deg", a.trans_m, a.rot_deg);
    assert!(a.trans_m < 1e-9);
}

#[test]
fn similarity_scale_is_recovered_on_request() {
    let gt = wavy(200);
    let est = transformed(&gt, |_, p| Pose::new(p.position * 0.5, p.orientation));
    let p = pairs(&est, &gt);
    let al = align_trajectories(&p, true).unwrap();
    assert!((al.scale - 2.0).abs() < 1e-9);
    assert_eq!(align_trajectories(&p, false).unwrap().scale, 1.0);
}

#[test]
fn uniform_offset_without_alignment() {
    let gt = wavy(100);
    let est = transformed(&gt, |_, p| Pose::new(p.position + Vec3::new(0.1, 0.0, 0.0), p.orientation));
    let a = ate(&pairs(&est, &gt));
    assert!((a.trans_m - 0.1).abs() < 1e-12);
}

#[test]
fn collinear_path_is_flagged() {
    let gt = Trajectory::new(
        (0..50)
            .map(|i| (Timestamp::from_nanos(i * 10_000_000), Pose::new(Vec3::new(i as f64, 2.0 * i as f64, 0.0), Quat::identity())))
            .collect(),
    )
    .unwrap();
    let al = align_trajectories(&pairs(&gt, &gt), false).unwrap();
    assert!(al.degenerate);
}

#[test]
fn drift_rate_shows_up_in_rpe() {
    let gt = wavy(1000);
    let rate = 0.05;
    let dir = Vec3::new(1.0, 2.0, -0.5).normalize();
    let est = transformed(&gt, |t, p| Pose::new(p.position + dir * (rate * t), p.orientation));
    let delta = Duration::from_secs(1);
    let r = rpe(&pairs(&est, &gt), delta).unwrap();
    let expected = rate * delta.as_secs_f64();
    println!("rpe mean {:.6} m, expected {:.6} m", r.trans.mean, expected);
    assert!((r.trans.mean - expected).abs() <= 0.01 * expected);
    assert!(r.errors.iter().all(|e| (e.1 - expected).abs() <= 0.01 * expected));
}

#[test]
fn association_drops_far_samples() {
    let gt = wavy(10);
    let est = transformed(&gt, |_, p| *p);
    let shifted = Trajectory::new(est.samples().iter().map(|(t, p)| (*t + Duration::from_millis(6), *p)).collect()).unwrap();
    // Every shifted sample is 4 ms from its nearest neighbour; the last one
    // is 6 ms past the end.
    assert!(associate(&shifted, &gt, Duration::from_millis(3)).is_empty());
    assert_eq!(associate(&shifted, &gt, DEFAULT_MAX_GAP).len(), 9);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rpe_ignores_a_global_rigid_transform(yaw in -3.0f64..3.0, pitch in -1.0f64..1.0, tx in -5.0f64..5.0) {
        let gt = wavy(150);
        let noisy = transformed(&gt, |t, p| Pose::new(p.position + Vec3::new(0.01 * (7.0 * t).sin(), 0.0, 0.002 * t), p.orientation));
        let g = Pose::new(Vec3::new(tx, 1.0, -2.0), quat_from_yaw_pitch(yaw, pitch));
        let moved = transformed(&noisy, |_, p| g.compose(p));
        let d = Duration::from_millis(300);
        let a = rpe(&pairs(&noisy, &gt), d).unwrap();
        let b = rpe(&pairs(&moved, &gt), d).unwrap();
        for (x, y) in a.errors.iter().zip(&b.errors) {
            prop_assert!((x.1 - y.1).abs() < 1e-9);
            prop_assert!((x.2 - y.2).abs() < 1e-6);
        }
    }

    #[test]
    fn alignment_is_locally_optimal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = wavy(120);
        let est = transformed(&gt, |_, p| {
            let jitter = Vec3::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
            Pose::new(quat_from_yaw_pitch(0.3, 0.1) * p.position + Vec3::new(1.0, 0.0, 0.0) + jitter, p.orientation)
        });
        let p = pairs(&est, &gt);
        let best = align_trajectories(&p, false).unwrap();
        let base = position_rmse(&p, &best);
        for _ in 0..10 {
            let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let dq = Quat::from_scaled_axis(axis * 1e-3);
            let dt = Vec3::new(rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3));
            let perturbed = Alignment { rotation: dq * best.rotation, translation: best.translation + dt, ..best };
            prop_assert!(position_rmse(&p, &perturbed) >= base - 1e-12);
        }
    }
}
