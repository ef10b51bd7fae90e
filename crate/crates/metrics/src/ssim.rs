//! Structural similarity on Rec.601 luma with an 11×11 Gaussian window
//! (σ = 1.5) and 8-bit stabilizers. The score is the mean over every
//! position where the window fits inside the image. Scores are not clamped
//! here; they can be negative for anti-correlated images.

use xrsim_core::image::RgbImage;
use xrsim_core::par;

use crate::error::MetricsError;

const RADIUS: usize = 5;
const SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn window() -> [f64; 2 * RADIUS + 1] {
    let mut w = [0.0; 2 * RADIUS + 1];
    for (i, v) in w.iter_mut().enumerate() {
        let x = i as f64 - RADIUS as f64;
        *v = (-x * x / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|v| v / s)
}

/// Separable "valid" filtering of five moment images at once.
fn local_moments(a: &[f64], b: &[f64], w: usize, h: usize) -> Vec<[f64; 5]> {
    let k = window();
    let ow = w - 2 * RADIUS;
    let oh = h - 2 * RADIUS;
    // Horizontal pass over every row.
    let horiz: Vec<Vec<[f64; 5]>> = par::map_indexed(h, |y| {
        let ra = &a[y * w..(y + 1) * w];
        let rb = &b[y * w..(y + 1) * w];
        (0..ow)
            .map(|x| {
                let mut m = [0.0; 5];
                for (i, kv) in k.iter().enumerate() {
                    let (pa, pb) = (ra[x + i], rb[x + i]);
                    m[0] += kv * pa;
                    m[1] += kv * pb;
                    m[2] += kv * pa * pa;
                    m[3] += kv * pb * pb;
                    m[4] += kv * pa * pb;
                }
                m
            })
            .collect()
    });
    let rows = par::map_indexed(oh, |y| {
        (0..ow)
            .map(|x| {
                let mut m = [0.0; 5];
                for (i, kv) in k.iter().enumerate() {
                    let src = &horiz[y + i][x];
                    for c in 0..5 {
                        m[c] += kv * src[c];
                    }
                }
                m
            })
            .collect::<Vec<_>>()
    });
    rows.into_iter().flatten().collect()
}

/// SSIM between two grayscale images given in 0..=255 units.
pub fn ssim_gray(a: &[f64], b: &[f64], width: usize, height: usize) -> Result<f64, MetricsError> {
    if a.len() != width * height || b.len() != width * height {
        return Err(MetricsError::Input("buffer length does not match dimensions".into()));
    }
    if width < 2 * RADIUS + 1 || height < 2 * RADIUS + 1 {
        return Err(MetricsError::Input(format!(
            "images must be at least {0}x{0} for SSIM",
            2 * RADIUS + 1
        )));
    }
    let moments = local_moments(a, b, width, height);
    let sum: f64 = moments
        .iter()
        .map(|m| {
            let (mu_a, mu_b) = (m[0], m[1]);
            let var_a = m[2] - mu_a * mu_a;
            let var_b = m[3] - mu_b * mu_b;
            let cov = m[4] - mu_a * mu_b;
            ((2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2))
                / ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2))
        })
        .sum();
    Ok(sum / moments.len() as f64)
}

/// SSIM of the luma of two RGB images.
pub fn ssim(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricsError> {
    if a.dims() != b.dims() {
        return Err(MetricsError::Dimension {
            a_w: a.width(),
            a_h: a.height(),
            b_w: b.width(),
            b_h: b.height(),
        });
    }
    if a == b {
        return Ok(1.0);
    }
    ssim_gray(&a.luma(), &b.luma(), a.width(), a.height())
}
