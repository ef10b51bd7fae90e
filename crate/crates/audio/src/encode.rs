use xrsim_core::geometry::Vec3;
use xrsim_core::Timestamp;

use crate::block::{channel_count, check_order, normalize, AmbisonicBlock, AudioBlock};
use crate::error::AudioError;
use crate::sh::sh_sn3d;

/// A mono source placed at a fixed world direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub samples: Vec<i16>,
    pub direction: Vec3,
    pub gain: f64,
}

impl SourceSpec {
    pub fn new(samples: Vec<i16>, direction: Vec3, gain: f64) -> Result<Self, AudioError> {
        if (direction.norm() - 1.0).abs() > 1e-9 {
            return Err(AudioError::Input(format!("direction norm {} is not 1", direction.norm())));
        }
        if !gain.is_finite() {
            return Err(AudioError::Input("gain must be finite".into()));
        }
        Ok(Self { samples, direction, gain })
    }
}

/// Adds `samples` (already normalized) from `direction` into `field`.
pub fn accumulate_source(field: &mut AmbisonicBlock, samples: &[f64], direction: &Vec3, gain: f64) {
    let coeffs = sh_sn3d(field.order, direction);
    for (ch, c) in field.block.samples.iter_mut().zip(coeffs) {
        let g = c * gain;
        for (out, s) in ch.iter_mut().zip(samples) {
            *out += g * s;
        }
    }
}

/// Encodes block `block_index` (of `block_size` samples) of every source and
/// sums the fields. Sources shorter than the block are zero-padded.
pub fn encode(
    sources: &[SourceSpec],
    order: usize,
    block_size: usize,
    block_index: u64,
    sample_rate: u32,
) -> Result<AmbisonicBlock, AudioError> {
    check_order(order)?;
    if sources.is_empty() {
        return Err(AudioError::Input("no sources to encode".into()));
    }
    let start = block_index as usize * block_size;
    let ts = Timestamp::from_nanos(block_index * block_size as u64 * 1_000_000_000 / sample_rate as u64);
    let mut field = AmbisonicBlock {
        order,
        block: AudioBlock::silent(channel_count(order), block_size, sample_rate, ts),
    };
    for src in sources {
        let end = (start + block_size).min(src.samples.len());
        let chunk = if start < end { normalize(&src.samples[start..end]) } else { Vec::new() };
        accumulate_source(&mut field, &chunk, &src.direction, src.gain);
    }
    Ok(field)
}
