//! Per-channel radial distortion meshes.
//!
//! A mesh stores, for a regular grid of output vertices, the source
//! coordinate to sample in each color channel. The radial model is
//! `src = c + (dst - c) * (1 + k1 r² + k2 r⁴)` with `r` measured in
//! normalized camera units around the principal point `c`. Using slightly
//! different coefficients per channel corrects lateral chromatic
//! aberration.

use serde::{Deserialize, Serialize};
use xrsim_core::image::RgbImage;
use xrsim_core::par;

use crate::camera::CameraModel;
use crate::error::VisualError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RadialCoeffs {
    pub k1: f64,
    pub k2: f64,
}

impl RadialCoeffs {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k1, k2 }
    }

    fn scaled(self, s: f64) -> Self {
        Self::new(self.k1 * s, self.k2 * s)
    }

    fn factor(&self, r2: f64) -> f64 {
        1.0 + self.k1 * r2 + self.k2 * r2 * r2
    }
}

/// Coefficients for the red, green and blue channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelCoeffs {
    pub red: RadialCoeffs,
    pub green: RadialCoeffs,
    pub blue: RadialCoeffs,
}

impl Default for ChannelCoeffs {
    /// Placeholder lens: k1 = 0.22, k2 = 0.24 for red, green 3% weaker and
    /// blue 3% stronger.
    fn default() -> Self {
        let red = RadialCoeffs::new(0.22, 0.24);
        Self {
            red,
            green: red.scaled(0.97),
            blue: red.scaled(1.03),
        }
    }
}

impl ChannelCoeffs {
    pub fn uniform(c: RadialCoeffs) -> Self {
        Self {
            red: c,
            green: c,
            blue: c,
        }
    }

    fn as_array(&self) -> [RadialCoeffs; 3] {
        [self.red, self.green, self.blue]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionMesh {
    pub grid_w: usize,
    pub grid_h: usize,
    pub image_w: usize,
    pub image_h: usize,
    /// Per channel, `grid_w * grid_h` source coordinates in row-major order.
    pub channels: [Vec<[f64; 2]>; 3],
}

impl DistortionMesh {
    /// Output pixel coordinate of grid vertex `(i, j)`.
    pub fn vertex(&self, i: usize, j: usize) -> [f64; 2] {
        vertex_position(i, j, self.grid_w, self.grid_h, self.image_w, self.image_h)
    }

    pub fn source(&self, channel: usize, i: usize, j: usize) -> [f64; 2] {
        self.channels[channel][j * self.grid_w + i]
    }

    /// Source coordinate for output pixel `(x, y)`, bilinear in the grid.
    pub fn lookup(&self, channel: usize, x: f64, y: f64) -> [f64; 2] {
        let gx = x * (self.grid_w - 1) as f64 / (self.image_w.max(2) - 1) as f64;
        let gy = y * (self.grid_h - 1) as f64 / (self.image_h.max(2) - 1) as f64;
        let i0 = (gx.floor() as usize).min(self.grid_w - 2);
        let j0 = (gy.floor() as usize).min(self.grid_h - 2);
        let fx = gx - i0 as f64;
        let fy = gy - j0 as f64;
        let a = self.source(channel, i0, j0);
        let b = self.source(channel, i0 + 1, j0);
        let c = self.source(channel, i0, j0 + 1);
        let d = self.source(channel, i0 + 1, j0 + 1);
        let mut out = [0.0; 2];
        for k in 0..2 {
            let top = a[k] * (1.0 - fx) + b[k] * fx;
            let bottom = c[k] * (1.0 - fx) + d[k] * fx;
            out[k] = top * (1.0 - fy) + bottom * fy;
        }
        out
    }
}

fn vertex_position(i: usize, j: usize, gw: usize, gh: usize, w: usize, h: usize) -> [f64; 2] {
    [
        i as f64 * (w as f64 - 1.0) / (gw - 1) as f64,
        j as f64 * (h as f64 - 1.0) / (gh - 1) as f64,
    ]
}

fn check_grid(grid: (usize, usize)) -> Result<(), VisualError> {
    if grid.0 < 2 || grid.1 < 2 {
        return Err(VisualError::Input(format!(
            "mesh grid {}x{} must be at least 2x2",
            grid.0, grid.1
        )));
    }
    Ok(())
}

fn build_with(
    cam: &CameraModel,
    coeffs: &ChannelCoeffs,
    grid: (usize, usize),
    map: impl Fn(&RadialCoeffs, f64, f64) -> (f64, f64),
) -> Result<DistortionMesh, VisualError> {
    check_grid(grid)?;
    let (gw, gh) = grid;
    let channels = coeffs.as_array().map(|k| {
        let mut pts = Vec::with_capacity(gw * gh);
        for j in 0..gh {
            for i in 0..gw {
                let [x, y] = vertex_position(i, j, gw, gh, cam.width, cam.height);
                let nx = (x - cam.cx) / cam.fx;
                let ny = (y - cam.cy) / cam.fy;
                let (sx, sy) = map(&k, nx, ny);
                pts.push([cam.cx + sx * cam.fx, cam.cy + sy * cam.fy]);
            }
        }
        pts
    });
    Ok(DistortionMesh {
        grid_w: gw,
        grid_h: gh,
        image_w: cam.width,
        image_h: cam.height,
        channels,
    })
}

/// Mesh applying the radial mapping to every channel.
pub fn build_distortion_mesh(
    cam: &CameraModel,
    coeffs: &ChannelCoeffs,
    grid: (usize, usize),
) -> Result<DistortionMesh, VisualError> {
    build_with(cam, coeffs, grid, |k, nx, ny| {
        let f = k.factor(nx * nx + ny * ny);
        (nx * f, ny * f)
    })
}

/// Mesh undoing [`build_distortion_mesh`]: each vertex maps to the point the
/// forward mapping sends onto it, found by Newton iteration on the radius.
pub fn build_inverse_mesh(
    cam: &CameraModel,
    coeffs: &ChannelCoeffs,
    grid: (usize, usize),
) -> Result<DistortionMesh, VisualError> {
    build_with(cam, coeffs, grid, |k, nx, ny| {
        let rd = (nx * nx + ny * ny).sqrt();
        if rd == 0.0 {
            return (0.0, 0.0);
        }
        let mut r = rd;
        for _ in 0..50 {
            let r2 = r * r;
            let g = r * k.factor(r2) - rd;
            let dg = 1.0 + 3.0 * k.k1 * r2 + 5.0 * k.k2 * r2 * r2;
            let step = g / dg;
            r -= step;
            if step.abs() < 1e-15 * rd.max(1.0) {
                break;
            }
        }
        let s = r / rd;
        (nx * s, ny * s)
    })
}

/// Single-channel bilinear sample with edge clamping.
fn sample_channel(img: &RgbImage, channel: usize, x: f64, y: f64) -> f64 {
    let (w, h) = img.dims();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = (x.floor() as usize).min(w.saturating_sub(2));
    let y0 = (y.floor() as usize).min(h.saturating_sub(2));
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let p = |xx, yy| img.get(xx, yy)[channel] as f64;
    let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
    let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Warps each channel of `image` through its grid in `mesh`.
pub fn apply_distortion(image: &RgbImage, mesh: &DistortionMesh) -> Result<RgbImage, VisualError> {
    let (w, h) = image.dims();
    if (w, h) != (mesh.image_w, mesh.image_h) {
        return Err(VisualError::Dimension {
            expected_w: mesh.image_w,
            expected_h: mesh.image_h,
            actual_w: w,
            actual_h: h,
        });
    }
    let mut out = RgbImage::new(w, h);
    par::for_each_row(out.as_raw_mut(), w * 3, |y, row| {
        for x in 0..w {
            for c in 0..3 {
                let [sx, sy] = mesh.lookup(c, x as f64, y as f64);
                let v = sample_channel(image, c, sx, sy);
                row[x * 3 + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    });
    Ok(out)
}
