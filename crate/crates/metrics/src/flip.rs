//! FLIP perceptual difference for low-dynamic-range sRGB images.
//!
//! Color term: both images go to YCxCz, are filtered with contrast
//! sensitivity kernels, clamped back into linear RGB, converted to L*a*b*
//! with the Hunt adjustment, compared with the HyAB distance and remapped
//! so that the largest meaningful difference lands on 1. Feature term:
//! first and second derivative-of-Gaussian responses on the achromatic
//! channel. The per-pixel error is `ΔE_c ^ (1 - ΔE_f)`.

use xrsim_core::image::RgbImage;
use xrsim_core::par;

use crate::error::MetricsError;

pub const DEFAULT_PPD: f64 = 67.0;

const QC: f64 = 0.7;
const QF: f64 = 0.5;
const PC: f64 = 0.4;
const PT: f64 = 0.95;
const FEATURE_WIDTH: f64 = 0.082;

const WHITE: [f64; 3] = [0.950428545, 1.0, 1.088900371];

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [10135552.0 / 24577794.0, 8788810.0 / 24577794.0, 4435075.0 / 24577794.0],
    [2613072.0 / 12288897.0, 8788810.0 / 12288897.0, 887015.0 / 12288897.0],
    [1425312.0 / 73733382.0, 8788810.0 / 73733382.0, 70074185.0 / 73733382.0],
];

const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.241003232976358, -1.537398969488785, -0.498615881996363],
    [-0.969224252202516, 1.875929983695176, 0.041554226340085],
    [0.055639419851975, -0.204011206123910, 1.057148977187533],
];

fn mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn xyz_to_ycxcz(xyz: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = [xyz[0] / WHITE[0], xyz[1] / WHITE[1], xyz[2] / WHITE[2]];
    [116.0 * y - 16.0, 500.0 * (x - y), 200.0 * (y - z)]
}

fn ycxcz_to_xyz(c: [f64; 3]) -> [f64; 3] {
    let y = (c[0] + 16.0) / 116.0;
    let x = y + c[1] / 500.0;
    let z = y - c[2] / 200.0;
    [x * WHITE[0], y * WHITE[1], z * WHITE[2]]
}

fn xyz_to_lab(xyz: [f64; 3]) -> [f64; 3] {
    const D: f64 = 6.0 / 29.0;
    let f = |t: f64| {
        if t > D * D * D {
            t.cbrt()
        } else {
            t / (3.0 * D * D) + 4.0 / 29.0
        }
    };
    let [x, y, z] = [f(xyz[0] / WHITE[0]), f(xyz[1] / WHITE[1]), f(xyz[2] / WHITE[2])];
    [116.0 * y - 16.0, 500.0 * (x - y), 200.0 * (y - z)]
}

fn hunt(lab: [f64; 3]) -> [f64; 3] {
    [lab[0], 0.01 * lab[0] * lab[1], 0.01 * lab[0] * lab[2]]
}

fn hyab(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - b[0]).abs() + ((a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn linear_rgb_to_hunt_lab(rgb: [f64; 3]) -> [f64; 3] {
    hunt(xyz_to_lab(mul(&RGB_TO_XYZ, rgb)))
}

/// A planar single-channel float image.
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

/// Separable convolution with edge clamping.
fn convolve(src: &Plane, kx: &[f64], ky: &[f64]) -> Plane {
    let (w, h) = (src.w, src.h);
    let rx = (kx.len() / 2) as isize;
    let ry = (ky.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    par::for_each_row(&mut tmp, w, |y, row| {
        let line = &src.data[y * w..(y + 1) * w];
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, k) in kx.iter().enumerate() {
                acc += k * line[clamp(x as isize + i as isize - rx, w)];
            }
            *out = acc;
        }
    });
    let mut data = vec![0.0; w * h];
    par::for_each_row(&mut data, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, k) in ky.iter().enumerate() {
                acc += k * tmp[clamp(y as isize + i as isize - ry, h) * w + x];
            }
            *out = acc;
        }
    });
    Plane { w, h, data }
}

/// Contrast sensitivity kernel of one opponent channel as a sum of
/// separable Gaussian terms `(weight, 1-D taps)`.
fn csf_terms(ppd: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> Vec<(f64, Vec<f64>)> {
    const MAX_B: f64 = 0.04;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let r = (3.0 * (MAX_B / (2.0 * pi2)).sqrt() * ppd).ceil() as isize;
    let dx = 1.0 / ppd;
    let taps = |b: f64| -> Vec<f64> {
        (-r..=r)
            .map(|i| {
                let x = i as f64 * dx;
                (-pi2 * x * x / b).exp()
            })
            .collect()
    };
    let mut terms = Vec::new();
    let mut total = 0.0;
    for (a, b) in [(a1, b1), (a2, b2)] {
        if a == 0.0 {
            continue;
        }
        let t = taps(b);
        let s: f64 = t.iter().sum();
        let amp = a * (std::f64::consts::PI / b).sqrt();
        total += amp * s * s;
        terms.push((amp, t));
    }
    terms.into_iter().map(|(amp, t)| (amp / total, t)).collect()
}

fn filter_channel(src: &Plane, terms: &[(f64, Vec<f64>)]) -> Plane {
    let mut out = Plane {
        w: src.w,
        h: src.h,
        data: vec![0.0; src.w * src.h],
    };
    for (weight, taps) in terms {
        let part = convolve(src, taps, taps);
        for (o, p) in out.data.iter_mut().zip(&part.data) {
            *o += weight * p;
        }
    }
    out
}

/// Normalized 1-D feature kernel pair `(derivative, smoothing)`.
fn feature_kernels(ppd: f64, second_order: bool) -> (Vec<f64>, Vec<f64>) {
    let sd = 0.5 * FEATURE_WIDTH * ppd;
    let r = (3.0 * sd).ceil() as isize;
    let g: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * sd * sd)).exp()).collect();
    let d: Vec<f64> = (-r..=r)
        .zip(&g)
        .map(|(i, gv)| {
            let x = i as f64;
            if second_order {
                (x * x / (sd * sd) - 1.0) * gv
            } else {
                -x * gv
            }
        })
        .collect();
    let pos: f64 = d.iter().filter(|v| **v > 0.0).sum();
    let neg: f64 = -d.iter().filter(|v| **v < 0.0).sum::<f64>();
    let d = d.into_iter().map(|v| if v > 0.0 { v / pos } else { v / neg }).collect();
    let gs: f64 = g.iter().sum();
    (d, g.into_iter().map(|v| v / gs).collect())
}

struct Prepared {
    /// Hunt-adjusted Lab of the filtered image.
    lab: Vec<[f64; 3]>,
    edge: Vec<f64>,
    point: Vec<f64>,
}

fn prepare(img: &RgbImage, ppd: f64) -> Prepared {
    let (w, h) = img.dims();
    let n = w * h;
    let mut planes: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, px) in img.as_raw().chunks_exact(3).enumerate() {
        let lin = [0, 1, 2].map(|c| srgb_to_linear(px[c] as f64 / 255.0));
        let ycc = xyz_to_ycxcz(mul(&RGB_TO_XYZ, lin));
        for c in 0..3 {
            planes[c][i] = ycc[c];
        }
    }
    let plane = |data: &Vec<f64>| Plane { w, h, data: data.clone() };

    let params = [(1.0, 0.0047, 0.0, 1e-5), (1.0, 0.0053, 0.0, 1e-5), (34.1, 0.04, 13.5, 0.025)];
    let filtered: Vec<Plane> = planes
        .iter()
        .zip(params)
        .map(|(p, (a1, b1, a2, b2))| filter_channel(&plane(p), &csf_terms(ppd, a1, b1, a2, b2)))
        .collect();
    let lab = (0..n)
        .map(|i| {
            let ycc = [filtered[0].data[i], filtered[1].data[i], filtered[2].data[i]];
            let rgb = mul(&XYZ_TO_RGB, ycxcz_to_xyz(ycc)).map(|v| v.clamp(0.0, 1.0));
            linear_rgb_to_hunt_lab(rgb)
        })
        .collect();

    let y = Plane {
        w,
        h,
        data: planes[0].iter().map(|v| (v + 16.0) / 116.0).collect(),
    };
    let magnitude = |second: bool| {
        let (d, g) = feature_kernels(ppd, second);
        let gx = convolve(&y, &d, &g);
        let gy = convolve(&y, &g, &d);
        gx.data.iter().zip(&gy.data).map(|(a, b)| a.hypot(*b)).collect::<Vec<_>>()
    };
    Prepared {
        lab,
        edge: magnitude(false),
        point: magnitude(true),
    }
}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<(), MetricsError> {
    if a.dims() != b.dims() {
        return Err(MetricsError::Dimension {
            a_w: a.width(),
            a_h: a.height(),
            b_w: b.width(),
            b_h: b.height(),
        });
    }
    Ok(())
}

/// Per-pixel FLIP error in `[0, 1]`, row-major.
pub fn flip_map(reference: &RgbImage, test: &RgbImage, ppd: f64) -> Result<Vec<f64>, MetricsError> {
    check_dims(reference, test)?;
    if !(ppd > 0.0 && ppd.is_finite()) {
        return Err(MetricsError::Input("pixels per degree must be positive".into()));
    }
    let r = prepare(reference, ppd);
    let t = prepare(test, ppd);
    let cmax = hyab(linear_rgb_to_hunt_lab([0.0, 1.0, 0.0]), linear_rgb_to_hunt_lab([0.0, 0.0, 1.0])).powf(QC);
    let pccmax = PC * cmax;
    Ok((0..r.lab.len())
        .map(|i| {
            let e = hyab(r.lab[i], t.lab[i]).powf(QC);
            let color = if e < pccmax {
                PT / pccmax * e
            } else {
                PT + (e - pccmax) / (cmax - pccmax) * (1.0 - PT)
            };
            let feature = (r.edge[i] - t.edge[i]).abs().max((r.point[i] - t.point[i]).abs());
            let feature = (feature / std::f64::consts::SQRT_2).powf(QF);
            color.powf(1.0 - feature)
        })
        .collect())
}

/// Mean FLIP error; report `1 - flip` as the quality score.
pub fn flip(reference: &RgbImage, test: &RgbImage, ppd: f64) -> Result<f64, MetricsError> {
    check_dims(reference, test)?;
    if reference == test {
        return Ok(0.0);
    }
    let map = flip_map(reference, test, ppd)?;
    Ok(map.iter().sum::<f64>() / map.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_transforms_roundtrip() {
        let rgb = [0.2, 0.5, 0.9];
        let back = mul(&XYZ_TO_RGB, ycxcz_to_xyz(xyz_to_ycxcz(mul(&RGB_TO_XYZ, rgb))));
        for c in 0..3 {
            assert!((back[c] - rgb[c]).abs() < 1e-9);
        }
    }

    #[test]
    fn white_has_lightness_100() {
        let lab = xyz_to_lab(mul(&RGB_TO_XYZ, [1.0; 3]));
        assert!((lab[0] - 100.0).abs() < 1e-6);
        assert!(lab[1].abs() < 1e-4 && lab[2].abs() < 1e-4);
    }

    #[test]
    fn csf_kernels_sum_to_one() {
        for (a1, b1, a2, b2) in [(1.0, 0.0047, 0.0, 1e-5), (34.1, 0.04, 13.5, 0.025)] {
            let terms = csf_terms(67.0, a1, b1, a2, b2);
            let total: f64 = terms.iter().map(|(w, t)| w * t.iter().sum::<f64>().powi(2)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(terms[0].1.len(), 21);
        }
    }

    #[test]
    fn feature_kernels_are_balanced() {
        for second in [false, true] {
            let (d, g) = feature_kernels(67.0, second);
            assert!(d.iter().sum::<f64>().abs() < 1e-12);
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
