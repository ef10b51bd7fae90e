//! Soundfield rotation by per-degree real spherical-harmonic rotation
//! matrices, built with the Ivanic-Ruedenberg recurrence.

use xrsim_core::geometry::Quat;
use xrsim_core::nalgebra::{DMatrix, Matrix3};

use crate::block::AmbisonicBlock;

/// Block-diagonal rotation for one orientation; degree 0 is the identity.
///
/// Rotating by the head orientation `q` (body to world) turns a world-frame
/// field into a head-relative one: a source at world direction `d` ends up
/// at `R(q)ᵀ d`.
#[derive(Clone, Debug)]
pub struct SoundfieldRotation {
    bands: Vec<DMatrix<f64>>,
}

impl SoundfieldRotation {
    pub fn new(order: usize, orientation: &Quat) -> Self {
        let rt = orientation.to_rotation_matrix().matrix().transpose();
        let r1 = band1(&rt);
        let mut bands = vec![DMatrix::identity(1, 1), r1.clone()];
        for l in 2..=order as i64 {
            let next = next_band(l, &r1, bands.last().expect("previous band"));
            bands.push(next);
        }
        bands.truncate(order + 1);
        Self { bands }
    }

    pub fn order(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, l: usize) -> &DMatrix<f64> {
        &self.bands[l]
    }

    /// Full `(order+1)²` square matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = (self.order() + 1).pow(2);
        let mut m = DMatrix::zeros(n, n);
        for (l, b) in self.bands.iter().enumerate() {
            m.view_mut((l * l, l * l), (2 * l + 1, 2 * l + 1)).copy_from(b);
        }
        m
    }

    pub fn apply(&self, block: &AmbisonicBlock) -> AmbisonicBlock {
        assert_eq!(block.order, self.order(), "rotation order mismatch");
        let mut out = block.clone();
        let len = block.len();
        for (l, b) in self.bands.iter().enumerate().skip(1) {
            let base = l * l;
            let width = 2 * l + 1;
            for i in 0..width {
                let dst = &mut out.block.samples[base + i];
                dst.iter_mut().for_each(|s| *s = 0.0);
                for j in 0..width {
                    let c = b[(i, j)];
                    if c == 0.0 {
                        continue;
                    }
                    let src = &block.block.samples[base + j];
                    for k in 0..len {
                        dst[k] += c * src[k];
                    }
                }
            }
        }
        out
    }
}

pub fn rotate_soundfield(block: &AmbisonicBlock, orientation: &Quat) -> AmbisonicBlock {
    SoundfieldRotation::new(block.order, orientation).apply(block)
}

/// Reorders a Cartesian rotation into the ACN degree-1 channel order (y, z, x).
fn band1(r: &Matrix3<f64>) -> DMatrix<f64> {
    let perm = [1usize, 2, 0];
    DMatrix::from_fn(3, 3, |i, j| r[(perm[i], perm[j])])
}

fn next_band(l: i64, r1: &DMatrix<f64>, prev: &DMatrix<f64>) -> DMatrix<f64> {
    let size = (2 * l + 1) as usize;
    let r1at = |m: i64, n: i64| r1[((m + 1) as usize, (n + 1) as usize)];
    let pr = |m: i64, n: i64| prev[((m + l - 1) as usize, (n + l - 1) as usize)];
    let p = |i: i64, a: i64, b: i64| -> f64 {
        if b == l {
            r1at(i, 1) * pr(a, l - 1) - r1at(i, -1) * pr(a, -l + 1)
        } else if b == -l {
            r1at(i, 1) * pr(a, -l + 1) + r1at(i, -1) * pr(a, l - 1)
        } else {
            r1at(i, 0) * pr(a, b)
        }
    };
    let delta = |a: i64, b: i64| if a == b { 1.0 } else { 0.0 };
    DMatrix::from_fn(size, size, |row, col| {
        let m = row as i64 - l;
        let n = col as i64 - l;
        let d = delta(m, 0);
        let denom = if n.abs() == l { (2 * l * (2 * l - 1)) as f64 } else { ((l + n) * (l - n)) as f64 };
        let am = m.abs();
        let u = (((l + m) * (l - m)) as f64 / denom).sqrt();
        let v = 0.5 * ((1.0 + d) * ((l + am - 1) * (l + am)) as f64 / denom).sqrt() * (1.0 - 2.0 * d);
        let w = -0.5 * (((l - am - 1) * (l - am)) as f64 / denom).sqrt() * (1.0 - d);
        let mut acc = 0.0;
        if u != 0.0 {
            acc += u * p(0, m, n);
        }
        if v != 0.0 {
            let vv = if m == 0 {
                p(1, 1, n) + p(-1, -1, n)
            } else if m > 0 {
                let d1 = delta(m, 1);
                p(1, m - 1, n) * (1.0 + d1).sqrt() - p(-1, -m + 1, n) * (1.0 - d1)
            } else {
                let d1 = delta(m, -1);
                p(1, m + 1, n) * (1.0 - d1) + p(-1, -m - 1, n) * (1.0 + d1).sqrt()
            };
            acc += v * vv;
        }
        if w != 0.0 {
            let ww = if m > 0 {
                p(1, m + 1, n) + p(-1, -m - 1, n)
            } else {
                p(1, m - 1, n) - p(-1, -m + 1, n)
            };
            acc += w * ww;
        }
        acc
    })
}
