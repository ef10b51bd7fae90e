//! Real spherical harmonics, ACN order, SN3D normalization, up to order 3.
//!
//! Directions use x forward, y left, z up, so azimuth runs from +x towards
//! +y and elevation towards +z.

use xrsim_core::geometry::Vec3;

/// Spherical harmonic values for a unit direction, `(order+1)²` entries.
pub fn sh_sn3d(order: usize, dir: &Vec3) -> Vec<f64> {
    assert!(order <= 3, "order {order} not supported");
    let (x, y, z) = (dir.x, dir.y, dir.z);
    let s3 = 3f64.sqrt();
    let mut out = Vec::with_capacity((order + 1) * (order + 1));
    out.push(1.0);
    if order >= 1 {
        out.extend([y, z, x]);
    }
    if order >= 2 {
        out.extend([
            s3 * x * y,
            s3 * y * z,
            0.5 * (3.0 * z * z - 1.0),
            s3 * x * z,
            0.5 * s3 * (x * x - y * y),
        ]);
    }
    if order >= 3 {
        let a = (5.0f64 / 8.0).sqrt();
        let b = (3.0f64 / 8.0).sqrt();
        let c = 15f64.sqrt();
        out.extend([
            a * y * (3.0 * x * x - y * y),
            c * x * y * z,
            b * y * (5.0 * z * z - 1.0),
            0.5 * z * (5.0 * z * z - 3.0),
            b * x * (5.0 * z * z - 1.0),
            0.5 * c * z * (x * x - y * y),
            a * x * (x * x - 3.0 * y * y),
        ]);
    }
    out
}

/// ACN index to (degree l, signed order m).
pub fn acn_degree_order(acn: usize) -> (usize, i64) {
    let l = (acn as f64).sqrt() as usize;
    (l, acn as i64 - (l * l + l) as i64)
}

/// Unit vector from azimuth and elevation in radians.
pub fn direction(azimuth: f64, elevation: f64) -> Vec3 {
    Vec3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    )
}
