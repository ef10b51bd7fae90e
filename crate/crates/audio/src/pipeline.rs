//! Stateful encode and playback stages as driven by the runtime.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use xrsim_core::geometry::Quat;

use crate::binaural::{Binauralizer, PsychoacousticFilter};
use crate::block::{check_order, AmbisonicBlock, AudioBlock};
use crate::encode::{encode, SourceSpec};
use crate::error::AudioError;
use crate::hrtf::HrtfSet;
use crate::rotate::rotate_soundfield;
use crate::zoom::zoom_soundfield;

/// Per-block processing budget at 48 blocks per second.
pub const BLOCK_DEADLINE: Duration = Duration::from_micros(20_800);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AudioConfig {
    pub order: usize,
    pub block_size: usize,
    pub sample_rate: u32,
    pub hrtf_taps: usize,
    pub zoom: f64,
}

impl Default for AudioConfig {
    fn default() -> Self {
        Self {
            order: 2,
            block_size: 1024,
            sample_rate: 48_000,
            hrtf_taps: 256,
            zoom: 0.0,
        }
    }
}

impl AudioConfig {
    pub fn validate(&self) -> Result<(), AudioError> {
        check_order(self.order)?;
        if self.block_size == 0 || self.sample_rate == 0 || self.hrtf_taps == 0 {
            return Err(AudioError::Config("block size, sample rate and taps must be positive".into()));
        }
        if !self.zoom.is_finite() {
            return Err(AudioError::Config("zoom must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct AudioEncoder {
    config: AudioConfig,
    sources: Vec<SourceSpec>,
    next_block: u64,
}

impl AudioEncoder {
    pub fn new(config: AudioConfig, sources: Vec<SourceSpec>) -> Result<Self, AudioError> {
        config.validate()?;
        if sources.is_empty() {
            return Err(AudioError::Input("no sources to encode".into()));
        }
        Ok(Self {
            config,
            sources,
            next_block: 0,
        })
    }

    pub fn next_block(&mut self) -> Result<AmbisonicBlock, AudioError> {
        let c = &self.config;
        let block = encode(&self.sources, c.order, c.block_size, self.next_block, c.sample_rate)?;
        self.next_block += 1;
        Ok(block)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaybackOutput {
    pub stereo: AudioBlock,
    pub zoom_clamped: bool,
    pub elapsed: Duration,
    pub deadline_met: bool,
}

/// Psychoacoustic filter, rotation into the head frame, zoom and
/// binauralization, in that order.
#[derive(Debug)]
pub struct AudioPlayback {
    order: usize,
    zoom: f64,
    psycho: PsychoacousticFilter,
    binaural: Binauralizer,
}

impl AudioPlayback {
    pub fn new(config: &AudioConfig, hrtf: &HrtfSet) -> Result<Self, AudioError> {
        config.validate()?;
        if hrtf.sample_rate() != config.sample_rate {
            return Err(AudioError::Mismatch {
                what: "HRTF sample rate",
                expected: config.sample_rate as usize,
                actual: hrtf.sample_rate() as usize,
            });
        }
        let channels = (config.order + 1).pow(2);
        Ok(Self {
            order: config.order,
            zoom: config.zoom,
            psycho: PsychoacousticFilter::max_re(config.order, config.block_size, hrtf.taps())?,
            binaural: Binauralizer::new(hrtf, channels, config.block_size)?,
        })
    }

    pub fn with_synthetic_hrtf(config: &AudioConfig) -> Result<Self, AudioError> {
        let hrtf = HrtfSet::synthetic(config.order, config.sample_rate, config.hrtf_taps)?;
        Self::new(config, &hrtf)
    }

    pub fn process(&mut self, block: &AmbisonicBlock, head: &Quat) -> Result<PlaybackOutput, AudioError> {
        if block.order != self.order {
            return Err(AudioError::Mismatch {
                what: "ambisonic order",
                expected: self.order,
                actual: block.order,
            });
        }
        let start = Instant::now();
        let filtered = self.psycho.process(block)?;
        let rotated = rotate_soundfield(&filtered, head);
        let zoomed = zoom_soundfield(&rotated, self.zoom);
        let stereo = self.binaural.process(&zoomed.block)?;
        let elapsed = start.elapsed();
        Ok(PlaybackOutput {
            stereo,
            zoom_clamped: zoomed.clamped,
            elapsed,
            deadline_met: elapsed <= BLOCK_DEADLINE,
        })
    }
}
