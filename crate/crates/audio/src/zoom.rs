use std::f64::consts::SQRT_2;

use crate::block::AmbisonicBlock;

#[derive(Clone, Debug, PartialEq)]
pub struct Zoomed {
    pub block: AmbisonicBlock,
    /// The requested zoom was outside [−1, 1] and has been clamped.
    pub clamped: bool,
}

/// Forward-dominance zoom on the (W, X) pair.
///
/// `W' = k(W + z/√2·X)`, `X' = k(X + √2·z·W)` with `k = 1/(1 + |z|/√2)`,
/// which keeps the omnidirectional gain of any plane wave at or below 1.
/// The remaining channels are scaled by `k·√(1 − z²)`, fading the lateral
/// and vertical detail as the zoom approaches ±1.
pub fn zoom_soundfield(block: &AmbisonicBlock, zoom: f64) -> Zoomed {
    let clamped = !(-1.0..=1.0).contains(&zoom) || zoom.is_nan();
    let z = if zoom.is_nan() { 0.0 } else { zoom.clamp(-1.0, 1.0) };
    if z == 0.0 {
        return Zoomed {
            block: block.clone(),
            clamped,
        };
    }
    let k = 1.0 / (1.0 + z.abs() / SQRT_2);
    let rest = k * (1.0 - z * z).sqrt();
    let mut out = block.clone();
    let samples = &mut out.block.samples;
    let (w_in, x_in) = (&block.block.samples[0], &block.block.samples[3]);
    for i in 0..block.len() {
        let (w, x) = (w_in[i], x_in[i]);
        samples[0][i] = k * (w + z / SQRT_2 * x);
        samples[3][i] = k * (x + SQRT_2 * z * w);
    }
    for (ch, s) in samples.iter_mut().enumerate() {
        if ch != 0 && ch != 3 {
            s.iter_mut().for_each(|v| *v *= rest);
        }
    }
    Zoomed { block: out, clamped }
}
