use xrsim_core::Timestamp;

use crate::error::AudioError;

/// Channel-major block of float samples.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBlock {
    pub samples: Vec<Vec<f64>>,
    pub sample_rate: u32,
    pub ts: Timestamp,
}

impl AudioBlock {
    pub fn new(samples: Vec<Vec<f64>>, sample_rate: u32, ts: Timestamp) -> Result<Self, AudioError> {
        let Some(first) = samples.first() else {
            return Err(AudioError::Input("block has no channels".into()));
        };
        let len = first.len();
        if let Some(bad) = samples.iter().find(|c| c.len() != len) {
            return Err(AudioError::Mismatch {
                what: "channel length",
                expected: len,
                actual: bad.len(),
            });
        }
        if samples.iter().flatten().any(|s| !s.is_finite()) {
            return Err(AudioError::Input("non-finite sample".into()));
        }
        Ok(Self { samples, sample_rate, ts })
    }

    pub fn silent(channels: usize, len: usize, sample_rate: u32, ts: Timestamp) -> Self {
        Self {
            samples: vec![vec![0.0; len]; channels],
            sample_rate,
            ts,
        }
    }

    pub fn channels(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Higher-order ambisonic block, ACN channel order with SN3D normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbisonicBlock {
    pub order: usize,
    pub block: AudioBlock,
}

pub fn channel_count(order: usize) -> usize {
    (order + 1) * (order + 1)
}

pub fn check_order(order: usize) -> Result<(), AudioError> {
    if (1..=3).contains(&order) {
        Ok(())
    } else {
        Err(AudioError::Config(format!("ambisonic order {order} outside 1..=3")))
    }
}

impl AmbisonicBlock {
    pub fn new(order: usize, block: AudioBlock) -> Result<Self, AudioError> {
        check_order(order)?;
        if block.channels() != channel_count(order) {
            return Err(AudioError::Mismatch {
                what: "ambisonic channel count",
                expected: channel_count(order),
                actual: block.channels(),
            });
        }
        Ok(Self { order, block })
    }

    pub fn silent(order: usize, len: usize, sample_rate: u32, ts: Timestamp) -> Result<Self, AudioError> {
        check_order(order)?;
        Ok(Self {
            order,
            block: AudioBlock::silent(channel_count(order), len, sample_rate, ts),
        })
    }

    pub fn channels(&self) -> usize {
        self.block.channels()
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    /// Σ over channels of s² at sample `i`.
    pub fn energy_at(&self, i: usize) -> f64 {
        self.block.samples.iter().map(|c| c[i] * c[i]).sum()
    }
}

/// 16-bit PCM to float, dividing by 32768.
pub fn normalize(samples: &[i16]) -> Vec<f64> {
    samples.iter().map(|&s| s as f64 / 32768.0).collect()
}
