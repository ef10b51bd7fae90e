//! Weighted Gerchberg-Saxton phase retrieval for multi-plane point holograms.
//!
//! Each target point sits on one of a set of depth planes. A pixel at
//! `(x, y)` reaches a point at `(x0, y0)` on a plane at distance `z` with the
//! Fresnel phase `Δ = π / (λ z) · ((x - x0)² + (y - y0)²)`. One iteration:
//!
//! 1. field at each point: `V_m = (1/P) Σ_p exp(i(φ_p + Δ_mp))`
//! 2. weights: `w_m ← w_m · mean(|V|/A) / (|V_m|/A_m)`, then rescaled to
//!    mean 1
//! 3. phases: `φ_p = arg Σ_m w_m (V_m / |V_m|) exp(-iΔ_mp)`
//!
//! Sums over pixels are formed per row and the row totals added in row
//! order, so results do not depend on how rows are scheduled.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use xrsim_core::image::write_pgm16;
use xrsim_core::par;

use crate::error::VisualError;

/// Depth planes closer than this in diopters are not distinguishable.
pub const MIN_PLANE_SPACING_DIOPTERS: f64 = 0.6;

/// Floor that keeps a starved point's weight able to recover.
const MIN_WEIGHT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthPoint {
    /// Lateral position on its plane, meters, relative to the mask center.
    pub x: f64,
    pub y: f64,
    pub plane: usize,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HologramProblem {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch_m: f64,
    pub wavelength_m: f64,
    pub plane_count: usize,
    /// Diopter value of the nearest plane; farther planes step down by
    /// `plane_spacing_diopters`.
    pub nearest_plane_diopters: f64,
    pub plane_spacing_diopters: f64,
    pub points: Vec<DepthPoint>,
    pub seed: u64,
}

impl HologramProblem {
    /// A green, 8 µm pitch mask with 10 planes from 6.6 D down to 1.2 D.
    pub fn new(width: usize, height: usize, points: Vec<DepthPoint>) -> Self {
        Self {
            width,
            height,
            pixel_pitch_m: 8e-6,
            wavelength_m: 520e-9,
            plane_count: 10,
            nearest_plane_diopters: 6.6,
            plane_spacing_diopters: MIN_PLANE_SPACING_DIOPTERS,
            points,
            seed: 0,
        }
    }

    /// Distance of each plane from the mask, meters.
    pub fn plane_depths(&self) -> Vec<f64> {
        (0..self.plane_count)
            .map(|k| 1.0 / (self.nearest_plane_diopters - k as f64 * self.plane_spacing_diopters))
            .collect()
    }

    pub fn validate(&self) -> Result<(), VisualError> {
        let bad = |m: &str| Err(VisualError::Input(m.to_owned()));
        if self.width == 0 || self.height == 0 {
            return bad("hologram must have at least one pixel");
        }
        if self.points.is_empty() {
            return bad("at least one depth point is required");
        }
        if !(self.pixel_pitch_m > 0.0 && self.wavelength_m > 0.0) {
            return bad("pixel pitch and wavelength must be positive");
        }
        if self.plane_count == 0 {
            return bad("at least one depth plane is required");
        }
        if self.plane_count > 1 && self.plane_spacing_diopters < MIN_PLANE_SPACING_DIOPTERS {
            return bad("depth planes must be at least 0.6 diopters apart");
        }
        let farthest = self.nearest_plane_diopters
            - (self.plane_count - 1) as f64 * self.plane_spacing_diopters;
        if farthest.is_nan() || farthest <= 0.0 {
            return bad("every plane must lie at a finite positive distance");
        }
        for p in &self.points {
            if p.plane >= self.plane_count {
                return bad("depth point refers to a missing plane");
            }
            if !(p.amplitude > 0.0 && p.x.is_finite() && p.y.is_finite()) {
                return bad("depth points need finite coordinates and positive amplitude");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GswResult {
    /// Row-major phases in `[0, 2π)`.
    pub phase: Vec<f64>,
    /// `|V_m|²` per point for the returned phases, normalized so a perfectly
    /// focused single point reaches 1.
    pub intensities: Vec<f64>,
    pub weights: Vec<f64>,
    /// Uniformity after each iteration (index 0 is iteration 1).
    pub uniformity_history: Vec<f64>,
    /// All points coincide; the single-point solution was used.
    pub degenerate: bool,
}

impl GswResult {
    pub fn uniformity(&self) -> f64 {
        self.uniformity_history.last().copied().unwrap_or(1.0)
    }
}

/// `min / max` of amplitude-normalized intensities.
pub fn uniformity(intensities: &[f64], points: &[DepthPoint]) -> f64 {
    let rel = intensities.iter().zip(points).map(|(i, p)| i / (p.amplitude * p.amplitude));
    let (lo, hi) = rel.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > 0.0 {
        lo / hi
    } else {
        0.0
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

struct Propagator {
    width: usize,
    /// `[point][pixel]` of (cos Δ, sin Δ).
    kernels: Vec<Vec<(f64, f64)>>,
}

impl Propagator {
    fn new(problem: &HologramProblem, points: &[DepthPoint]) -> Self {
        let depths = problem.plane_depths();
        let (w, h) = (problem.width, problem.height);
        let pitch = problem.pixel_pitch_m;
        let cx = (w as f64 - 1.0) / 2.0;
        let cy = (h as f64 - 1.0) / 2.0;
        let kernels = points
            .iter()
            .map(|pt| {
                let k = PI / (problem.wavelength_m * depths[pt.plane]);
                let mut out = Vec::with_capacity(w * h);
                for y in 0..h {
                    let dy = (y as f64 - cy) * pitch - pt.y;
                    for x in 0..w {
                        let dx = (x as f64 - cx) * pitch - pt.x;
                        let (s, c) = (k * (dx * dx + dy * dy)).sin_cos();
                        out.push((c, s));
                    }
                }
                out
            })
            .collect();
        Self { width: w, kernels }
    }

    /// Complex field at every point for the given phases.
    fn forward(&self, phase: &[f64]) -> Vec<(f64, f64)> {
        let w = self.width;
        let rows = phase.len() / w;
        let n = phase.len() as f64;
        let m = self.kernels.len();
        let per_row = par::map_indexed(rows, |y| {
            let mut acc = vec![(0.0, 0.0); m];
            let ph = &phase[y * w..(y + 1) * w];
            let pix: Vec<(f64, f64)> = ph.iter().map(|p| { let (s, c) = p.sin_cos(); (c, s) }).collect();
            for (k, kern) in self.kernels.iter().enumerate() {
                let kr = &kern[y * w..(y + 1) * w];
                let (mut re, mut im) = (0.0, 0.0);
                for (&(pc, ps), &(dc, ds)) in pix.iter().zip(kr) {
                    re += pc * dc - ps * ds;
                    im += pc * ds + ps * dc;
                }
                acc[k] = (re, im);
            }
            acc
        });
        let mut total = vec![(0.0, 0.0); m];
        for row in per_row {
            for (t, r) in total.iter_mut().zip(row) {
                t.0 += r.0;
                t.1 += r.1;
            }
        }
        total.into_iter().map(|(re, im)| (re / n, im / n)).collect()
    }

    /// Phases from weighted, unit-magnitude point fields.
    fn backward(&self, coeffs: &[(f64, f64)], phase: &mut [f64]) {
        let w = self.width;
        par::for_each_row(phase, w, |y, row| {
            for (x, out) in row.iter_mut().enumerate() {
                let i = y * w + x;
                let (mut re, mut im) = (0.0, 0.0);
                for (kern, &(a, b)) in self.kernels.iter().zip(coeffs) {
                    let (dc, ds) = kern[i];
                    // (a + ib)(dc - i ds)
                    re += a * dc + b * ds;
                    im += b * dc - a * ds;
                }
                *out = wrap_phase(im.atan2(re));
            }
        });
    }
}

fn intensities(field: &[(f64, f64)]) -> Vec<f64> {
    field.iter().map(|(re, im)| re * re + im * im).collect()
}

/// Runs `iterations` rounds of weighted Gerchberg-Saxton.
pub fn gsw_hologram(problem: &HologramProblem, iterations: usize) -> Result<GswResult, VisualError> {
    problem.validate()?;
    if iterations == 0 {
        return Err(VisualError::Input("at least one iteration is required".into()));
    }
    let points = &problem.points;
    let first = points[0];
    let degenerate = points
        .iter()
        .all(|p| p.x == first.x && p.y == first.y && p.plane == first.plane);

    if degenerate {
        let prop = Propagator::new(problem, &points[..1]);
        let mut phase = vec![0.0; problem.width * problem.height];
        prop.backward(&[(1.0, 0.0)], &mut phase);
        let single = intensities(&prop.forward(&phase))[0];
        return Ok(GswResult {
            phase,
            intensities: points.iter().map(|p| single * (p.amplitude / first.amplitude).powi(2)).collect(),
            weights: vec![1.0; points.len()],
            uniformity_history: vec![1.0; iterations],
            degenerate: true,
        });
    }

    let prop = Propagator::new(problem, points);
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let mut phase: Vec<f64> = (0..problem.width * problem.height)
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    let mut weights = vec![1.0; points.len()];
    let mut history = Vec::with_capacity(iterations);
    let mut field = prop.forward(&phase);

    for _ in 0..iterations {
        let mags: Vec<f64> = field.iter().map(|(re, im)| (re * re + im * im).sqrt()).collect();
        let rel: Vec<f64> = mags.iter().zip(points).map(|(m, p)| m / p.amplitude).collect();
        let mean = rel.iter().sum::<f64>() / rel.len() as f64;
        for (w, r) in weights.iter_mut().zip(&rel) {
            if *r > 0.0 {
                *w *= mean / r;
            }
        }
        // Only relative weights matter; rescaling keeps them representable
        // when a target cannot be met and one weight keeps growing.
        let norm = weights.iter().sum::<f64>() / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = (*w / norm).max(MIN_WEIGHT));
        let coeffs: Vec<(f64, f64)> = field
            .iter()
            .zip(&mags)
            .zip(&weights)
            .map(|((&(re, im), &m), &w)| if m > 0.0 { (w * re / m, w * im / m) } else { (w, 0.0) })
            .collect();
        prop.backward(&coeffs, &mut phase);
        field = prop.forward(&phase);
        history.push(uniformity(&intensities(&field), points));
    }

    Ok(GswResult {
        phase,
        intensities: intensities(&field),
        weights,
        uniformity_history: history,
        degenerate: false,
    })
}

/// Writes phases as a 16-bit PGM, mapping `[0, 2π)` onto `0..=65535`.
pub fn write_phase_mask<W: Write>(width: usize, height: usize, phase: &[f64], out: W) -> std::io::Result<()> {
    let samples: Vec<u16> = phase
        .iter()
        .map(|p| ((wrap_phase(*p) / TAU) * 65536.0).floor().min(65535.0) as u16)
        .collect();
    write_pgm16(width, height, &samples, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64, y: f64, plane: usize) -> DepthPoint {
        DepthPoint {
            x,
            y,
            plane,
            amplitude: 1.0,
        }
    }

    #[test]
    fn planes_respect_minimum_spacing() {
        let mut p = HologramProblem::new(8, 8, vec![point(0.0, 0.0, 0)]);
        let d = p.plane_depths();
        assert_eq!(d.len(), 10);
        for w in d.windows(2) {
            assert!((1.0 / w[0] - 1.0 / w[1] - 0.6).abs() < 1e-9);
        }
        p.plane_spacing_diopters = 0.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_point_focuses_perfectly() {
        let p = HologramProblem::new(16, 16, vec![point(1e-5, -2e-5, 3)]);
        let r = gsw_hologram(&p, 1).unwrap();
        assert!((r.intensities[0] - 1.0).abs() < 1e-9);
        assert_eq!(r.uniformity(), 1.0);
    }

    #[test]
    fn coincident_points_take_the_fast_path() {
        let p = HologramProblem::new(16, 16, vec![point(0.0, 0.0, 2); 3]);
        let r = gsw_hologram(&p, 5).unwrap();
        assert!(r.degenerate);
        assert!(r.phase.iter().all(|v| (0.0..TAU).contains(v)));
    }

    #[test]
    fn zero_iterations_rejected() {
        let p = HologramProblem::new(4, 4, vec![point(0.0, 0.0, 0)]);
        assert!(gsw_hologram(&p, 0).is_err());
    }

    #[test]
    fn phase_mask_quantization() {
        let mut buf = Vec::new();
        write_phase_mask(2, 1, &[0.0, TAU - 1e-12], &mut buf).unwrap();
        let (w, h, max, s) = xrsim_core::image::read_pgm(&buf[..]).unwrap();
        assert_eq!((w, h, max), (2, 1, 65535));
        assert_eq!(s, vec![0, 65535]);
    }
}
