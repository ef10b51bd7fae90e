use crate::block::{AmbisonicBlock, AudioBlock};
use crate::convolve::{Convolver, Route};
use crate::error::AudioError;
use crate::hrtf::HrtfSet;
use crate::sh::acn_degree_order;

/// Overlap-add state for rendering ambisonic blocks to two ears.
#[derive(Debug)]
pub struct Binauralizer {
    convolver: Convolver,
    sample_rate: u32,
}

impl Binauralizer {
    /// Uses the first `channels` filter pairs of `hrtf`.
    pub fn new(hrtf: &HrtfSet, channels: usize, block_size: usize) -> Result<Self, AudioError> {
        if hrtf.channels() < channels {
            return Err(AudioError::Mismatch {
                what: "HRTF channel count",
                expected: channels,
                actual: hrtf.channels(),
            });
        }
        let routes = (0..channels)
            .flat_map(|c| {
                (0..2).map(move |ear| Route {
                    input: c,
                    output: ear,
                    fir: hrtf.filter(c, ear).to_vec(),
                })
            })
            .collect();
        Ok(Self {
            convolver: Convolver::new(block_size, channels, 2, routes)?,
            sample_rate: hrtf.sample_rate(),
        })
    }

    pub fn process(&mut self, block: &AmbisonicBlock) -> Result<AudioBlock, AudioError> {
        if block.block.sample_rate != self.sample_rate {
            return Err(AudioError::Mismatch {
                what: "sample rate",
                expected: self.sample_rate as usize,
                actual: block.block.sample_rate as usize,
            });
        }
        let ears = self.convolver.process(&block.block.samples)?;
        Ok(AudioBlock {
            samples: ears,
            sample_rate: block.block.sample_rate,
            ts: block.block.ts,
        })
    }

    pub fn reset(&mut self) {
        self.convolver.reset();
    }
}

pub fn binauralize(block: &AmbisonicBlock, state: &mut Binauralizer) -> Result<AudioBlock, AudioError> {
    state.process(block)
}

/// Channel-wise FIR filtering of an ambisonic block.
#[derive(Debug)]
pub struct PsychoacousticFilter {
    convolver: Convolver,
}

impl PsychoacousticFilter {
    pub fn new(filters: Vec<Vec<f64>>, block_size: usize) -> Result<Self, AudioError> {
        let channels = filters.len();
        let routes = filters
            .into_iter()
            .enumerate()
            .map(|(c, fir)| Route {
                input: c,
                output: c,
                fir,
            })
            .collect();
        Ok(Self {
            convolver: Convolver::new(block_size, channels, channels, routes)?,
        })
    }

    /// Per-degree max-rE weights as single-tap filters padded to `taps`.
    pub fn max_re(order: usize, block_size: usize, taps: usize) -> Result<Self, AudioError> {
        if taps == 0 {
            return Err(AudioError::Config("filters must have at least one tap".into()));
        }
        let weights = max_re_weights(order);
        let filters = (0..(order + 1) * (order + 1))
            .map(|acn| {
                let mut fir = vec![0.0; taps];
                fir[0] = weights[acn_degree_order(acn).0];
                fir
            })
            .collect();
        Self::new(filters, block_size)
    }

    pub fn channels(&self) -> usize {
        self.convolver.inputs()
    }

    pub fn process(&mut self, block: &AmbisonicBlock) -> Result<AmbisonicBlock, AudioError> {
        let samples = self.convolver.process(&block.block.samples)?;
        Ok(AmbisonicBlock {
            order: block.order,
            block: AudioBlock { samples, ..block.block.clone() },
        })
    }

    pub fn reset(&mut self) {
        self.convolver.reset();
    }
}

pub fn psychoacoustic_filter(block: &AmbisonicBlock, state: &mut PsychoacousticFilter) -> Result<AmbisonicBlock, AudioError> {
    state.process(block)
}

/// Legendre polynomials evaluated at the max-rE radius for `order`.
pub fn max_re_weights(order: usize) -> Vec<f64> {
    let x = (137.9f64.to_radians() / (order as f64 + 1.51)).cos();
    let p = [1.0, x, 0.5 * (3.0 * x * x - 1.0), 0.5 * (5.0 * x * x * x - 3.0 * x)];
    p[..=order].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_re_weights_decrease_with_degree() {
        for order in 1..=3 {
            let w = max_re_weights(order);
            assert_eq!(w[0], 1.0);
            assert!(w.windows(2).all(|p| p[1] < p[0] && p[1] > 0.0), "{w:?}");
        }
        // first-order max-rE weight is 1/√3
        assert!((max_re_weights(1)[1] - 3f64.sqrt().recip()).abs() < 5e-3);
    }
}
