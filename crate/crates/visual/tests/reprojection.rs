use xrsim_core::geometry::{quat_from_yaw_pitch, Pose, Quat, Vec3};
use xrsim_core::image::RgbImage;
use xrsim_metrics::ssim;
use xrsim_visual::render::SKY;
use xrsim_visual::{render_app, reproject, CameraModel, RenderedFrame};

const SEED: u64 = 7;

/// Image-similarity thresholds below assume display-scale resolution; two
/// bilinear resamplings of this scene at 320x180 already cost ~0.05 SSIM.
fn cam() -> CameraModel {
    CameraModel::from_fov(1280, 720, 90.0)
}

fn head(yaw: f64) -> Pose {
    Pose::new(Vec3::new(1.0, 0.0, 1.6), quat_from_yaw_pitch(yaw, 0.25))
}

fn interior(img: &RgbImage) -> RgbImage {
    img.crop(2, 2, img.width() - 4, img.height() - 4)
}

#[test]
fn rendering_is_deterministic_and_pose_sensitive() {
    let a = render_app(SEED, &head(1.0), &cam());
    let b = render_app(SEED, &head(1.0), &cam());
    assert_eq!(a.image, b.image);
    let c = render_app(SEED, &head(1.0 + 0.5f64.to_radians()), &cam());
    assert_ne!(a.image, c.image);
    let other_scene = render_app(SEED + 1, &head(1.0), &cam());
    assert_ne!(a.image, other_scene.image);
}

#[test]
fn far_away_pose_sees_only_background() {
    let far = Pose::new(Vec3::new(0.0, 0.0, 1e4), quat_from_yaw_pitch(0.3, 0.0));
    let f = render_app(SEED, &far, &cam());
    assert!(f.image.as_raw().chunks(3).all(|p| p == SKY));
}

#[test]
fn identity_reprojection_preserves_interior() {
    let f = render_app(SEED, &head(1.0), &cam());
    let out = reproject(&f, &f.render_pose, &cam());
    assert_eq!(interior(&out), interior(&f.image));
    assert_eq!(ssim(&interior(&out), &interior(&f.image)).unwrap(), 1.0);
}

#[test]
fn small_yaw_matches_fresh_render() {
    let frame = render_app(SEED, &head(1.0), &cam());
    let target = head(1.0 + 2f64.to_radians());
    let warped = reproject(&frame, &target, &cam());
    let fresh = render_app(SEED, &target, &cam());
    let score = ssim(&warped.center_crop(0.8), &fresh.image.center_crop(0.8)).unwrap();
    println!("2 deg yaw reprojection vs re-render SSIM {score:.4}");
    assert!(score >= 0.90);
}

#[test]
fn half_turn_is_almost_all_black() {
    let frame = render_app(SEED, &head(1.0), &cam());
    let out = reproject(&frame, &head(1.0 + std::f64::consts::PI), &cam());
    let black = out.as_raw().chunks(3).filter(|p| *p == [0, 0, 0]).count();
    let frac = black as f64 / (out.width() * out.height()) as f64;
    assert!(frac >= 0.99, "{frac}");
}

#[test]
fn forward_then_inverse_rotation_roundtrips() {
    let frame = render_app(SEED, &head(1.0), &cam());
    let r = head(1.0);
    let delta = Quat::from_axis_angle(&Vec3::z_axis(), 2f64.to_radians())
        * Quat::from_axis_angle(&Vec3::y_axis(), 1f64.to_radians());
    let there = Pose::new(r.position, r.orientation * delta);
    let warped = reproject(&frame, &there, &cam());
    let moved = RenderedFrame {
        image: warped,
        render_pose: there,
        submit_ts: frame.submit_ts,
    };
    let back = reproject(&moved, &r, &cam());
    let score = ssim(&back.center_crop(0.8), &frame.image.center_crop(0.8)).unwrap();
    println!("rotation roundtrip SSIM {score:.4}");
    assert!(score >= 0.98);
}
