//! Rotation-only reprojection of a rendered frame to a newer head pose.

use xrsim_core::geometry::Pose;
use xrsim_core::image::RgbImage;
use xrsim_core::nalgebra::{Matrix3, Vector3};
use xrsim_core::par;

use crate::camera::{body_to_camera, CameraModel};
use crate::render::RenderedFrame;

/// Homography taking output pixels (seen from `predicted`) to source pixels
/// of a frame rendered at `render_pose`. Translation is ignored.
pub fn reprojection_homography(render_pose: &Pose, predicted: &Pose, cam: &CameraModel) -> Matrix3<f64> {
    let delta = (render_pose.orientation.inverse() * predicted.orientation)
        .to_rotation_matrix()
        .into_inner();
    let c = body_to_camera();
    cam.intrinsics() * c * delta * c.transpose() * cam.intrinsics_inverse()
}

/// Tolerance for treating a source coordinate as on the image border.
const EDGE_EPS: f64 = 1e-6;

/// Bilinear sample at `(x, y)`; `None` outside the image.
pub(crate) fn sample_bilinear(img: &RgbImage, x: f64, y: f64) -> Option<[f64; 3]> {
    let (w, h) = img.dims();
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    if !(x >= -EDGE_EPS && y >= -EDGE_EPS && x <= max_x + EDGE_EPS && y <= max_y + EDGE_EPS) {
        return None;
    }
    let x = x.clamp(0.0, max_x);
    let y = y.clamp(0.0, max_y);
    let x0 = (x.floor() as usize).min(w.saturating_sub(2));
    let y0 = (y.floor() as usize).min(h.saturating_sub(2));
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let (p00, p10, p01, p11) = (img.get(x0, y0), img.get(x1, y0), img.get(x0, y1), img.get(x1, y1));
    let mut out = [0.0; 3];
    for k in 0..3 {
        let top = p00[k] as f64 * (1.0 - fx) + p10[k] as f64 * fx;
        let bottom = p01[k] as f64 * (1.0 - fx) + p11[k] as f64 * fx;
        out[k] = top * (1.0 - fy) + bottom * fy;
    }
    Some(out)
}

/// Warps `frame` to the `predicted` orientation. Pixels whose source lies
/// behind the render camera or off the image are black.
pub fn reproject(frame: &RenderedFrame, predicted: &Pose, cam: &CameraModel) -> RgbImage {
    let hmat = reprojection_homography(&frame.render_pose, predicted, cam);
    let (w, h) = frame.image.dims();
    let mut out = RgbImage::new(w, h);
    par::for_each_row(out.as_raw_mut(), w * 3, |y, row| {
        for x in 0..w {
            let s = hmat * Vector3::new(x as f64, y as f64, 1.0);
            if s.z <= 0.0 {
                continue;
            }
            if let Some(c) = sample_bilinear(&frame.image, s.x / s.z, s.y / s.z) {
                let px = c.map(|v| v.round().clamp(0.0, 255.0) as u8);
                row[x * 3..x * 3 + 3].copy_from_slice(&px);
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use xrsim_core::geometry::{quat_from_yaw_pitch, Vec3};

    #[test]
    fn identical_poses_give_identity_homography() {
        let cam = CameraModel::from_fov(64, 36, 90.0);
        let p = Pose::new(Vec3::zeros(), quat_from_yaw_pitch(0.3, 0.1));
        let hm = reprojection_homography(&p, &p, &cam);
        assert!((hm - Matrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn yaw_left_shifts_content_right() {
        // Turning the head left brings things that were on the left toward
        // the center: output center samples the source left of center.
        let cam = CameraModel::from_fov(64, 36, 90.0);
        let r = Pose::identity();
        let p = Pose::new(Vec3::zeros(), quat_from_yaw_pitch(0.1, 0.0));
        let hm = reprojection_homography(&r, &p, &cam);
        let s = hm * Vector3::new(cam.cx, cam.cy, 1.0);
        assert!(s.x / s.z < cam.cx);
        assert!((s.y / s.z - cam.cy).abs() < 1e-9);
    }
}
