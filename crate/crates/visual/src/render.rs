//! Ray-cast stand-in for the application renderer.
//!
//! The scene is a finite checkered ground plane at z = 0 plus a handful of
//! axis-aligned boxes placed from a seed, under a constant sky. Boxes are
//! flat shaded from a fixed light direction. Each pixel averages a 2×2 grid
//! of rays.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xrsim_core::geometry::{Pose, Vec3};
use xrsim_core::image::RgbImage;
use xrsim_core::{par, Timestamp};

use crate::camera::{body_to_camera, CameraModel};

pub const SKY: [u8; 3] = [150, 185, 225];
const GROUND_HALF_EXTENT: f64 = 20.0;
const BOX_COUNT: usize = 14;
const SUBSAMPLES: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct RenderedFrame {
    pub image: RgbImage,
    pub render_pose: Pose,
    pub submit_ts: Timestamp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Aabb {
    min: Vec3,
    max: Vec3,
    color: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    boxes: Vec<Aabb>,
    light: Vec3,
}

impl Scene {
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let boxes = (0..BOX_COUNT)
            .map(|_| {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let dist = rng.random_range(3.0..9.0);
                let half = Vec3::new(
                    rng.random_range(0.2..0.9),
                    rng.random_range(0.2..0.9),
                    rng.random_range(0.3..1.4),
                );
                let center = Vec3::new(dist * angle.cos(), dist * angle.sin(), half.z);
                let color = [
                    rng.random_range(0.15..1.0),
                    rng.random_range(0.15..1.0),
                    rng.random_range(0.15..1.0),
                ];
                Aabb {
                    min: center - half,
                    max: center + half,
                    color,
                }
            })
            .collect();
        Self {
            boxes,
            light: Vec3::new(0.4, 0.3, 0.87).normalize(),
        }
    }

    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    /// Linear color seen along a ray.
    fn trace(&self, origin: &Vec3, dir: &Vec3) -> [f64; 3] {
        let mut best = f64::INFINITY;
        let mut color = None;
        for b in &self.boxes {
            if let Some((t, normal)) = hit_box(b, origin, dir) {
                if t < best {
                    best = t;
                    let shade = 0.45 + 0.55 * normal.dot(&self.light).max(0.0);
                    color = Some(b.color.map(|c| c * shade));
                }
            }
        }
        if dir.z < 0.0 {
            let t = -origin.z / dir.z;
            if t > 0.0 && t < best {
                let p = origin + dir * t;
                if p.x.abs() <= GROUND_HALF_EXTENT && p.y.abs() <= GROUND_HALF_EXTENT {
                    return ground_color(p.x, p.y);
                }
            }
        }
        color.unwrap_or(SKY.map(|c| c as f64 / 255.0))
    }
}

fn ground_color(x: f64, y: f64) -> [f64; 3] {
    let (cx, cy) = (x.floor() as i64, y.floor() as i64);
    let dark = (cx + cy).rem_euclid(2) == 0;
    // Hashed per-cell tint so the floor is not perfectly periodic.
    let h = (cx.wrapping_mul(73_856_093) ^ cy.wrapping_mul(19_349_663)) as u64;
    let tint = ((h.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 58) as f64) / 64.0 * 0.2;
    let base = if dark { 0.25 } else { 0.7 };
    let fx = x - x.floor();
    let fy = y - y.floor();
    let line = fx < 0.04 || fy < 0.04;
    let v = if line { 0.1 } else { base + tint };
    [v, v * 0.95 + 0.03, v * 0.85]
}

/// Slab test; returns the entry distance and the outward face normal.
fn hit_box(b: &Aabb, origin: &Vec3, dir: &Vec3) -> Option<(f64, Vec3)> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut axis = 0;
    for i in 0..3 {
        if dir[i].abs() < 1e-15 {
            if origin[i] < b.min[i] || origin[i] > b.max[i] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / dir[i];
        let mut t0 = (b.min[i] - origin[i]) * inv;
        let mut t1 = (b.max[i] - origin[i]) * inv;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_near {
            t_near = t0;
            axis = i;
        }
        t_far = t_far.min(t1);
    }
    if t_near > t_far || t_near <= 0.0 {
        return None;
    }
    let mut normal = Vec3::zeros();
    normal[axis] = -dir[axis].signum();
    Some((t_near, normal))
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Renders the scene for `scene_seed` from `pose`. Identical inputs give
/// identical pixels.
pub fn render_app(scene_seed: u64, pose: &Pose, cam: &CameraModel) -> RenderedFrame {
    let scene = Scene::generate(scene_seed);
    render_scene(&scene, pose, cam, Timestamp::ZERO)
}

/// Renders an already generated scene and stamps the frame with `submit_ts`.
pub fn render_scene(scene: &Scene, pose: &Pose, cam: &CameraModel, submit_ts: Timestamp) -> RenderedFrame {
    let (w, h) = (cam.width, cam.height);
    let cam_to_world = pose.orientation.to_rotation_matrix().into_inner() * body_to_camera().transpose();
    let origin = pose.position;
    let mut image = RgbImage::new(w, h);
    let n = SUBSAMPLES as f64;
    par::for_each_row(image.as_raw_mut(), w * 3, |y, row| {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for sy in 0..SUBSAMPLES {
                for sx in 0..SUBSAMPLES {
                    let u = x as f64 - 0.5 + (sx as f64 + 0.5) / n;
                    let v = y as f64 - 0.5 + (sy as f64 + 0.5) / n;
                    let dir = cam_to_world * cam.unproject(u, v);
                    let c = scene.trace(&origin, &dir);
                    for k in 0..3 {
                        acc[k] += c[k];
                    }
                }
            }
            let px = acc.map(|c| to_u8(c / (n * n)));
            row[x * 3..x * 3 + 3].copy_from_slice(&px);
        }
    });
    RenderedFrame {
        image,
        render_pose: *pose,
        submit_ts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use xrsim_core::geometry::quat_from_yaw_pitch;

    #[test]
    fn looking_straight_up_sees_only_sky() {
        let cam = CameraModel::from_fov(32, 18, 60.0);
        let pose = Pose::new(Vec3::new(0.0, 0.0, 50.0), quat_from_yaw_pitch(0.0, -1.4));
        let f = render_app(1, &pose, &cam);
        assert!(f.image.as_raw().chunks(3).all(|p| p == SKY));
    }

    #[test]
    fn looking_down_sees_the_floor() {
        let cam = CameraModel::from_fov(32, 18, 60.0);
        let pose = Pose::new(Vec3::new(0.0, 0.0, 1.6), quat_from_yaw_pitch(0.0, 1.5));
        let f = render_app(1, &pose, &cam);
        assert!(f.image.as_raw().chunks(3).all(|p| p != SKY));
    }

    #[test]
    fn box_hit_reports_entry_face() {
        let b = Aabb {
            min: Vec3::new(2.0, -1.0, -1.0),
            max: Vec3::new(3.0, 1.0, 1.0),
            color: [1.0; 3],
        };
        let (t, n) = hit_box(&b, &Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert_eq!(n, Vec3::new(-1.0, 0.0, 0.0));
        assert!(hit_box(&b, &Vec3::zeros(), &Vec3::new(-1.0, 0.0, 0.0)).is_none());
    }
}
