//! Per-ambisonic-channel binaural filters.

use std::f64::consts::PI;
use std::path::Path;

use hound::{SampleFormat, WavReader};
use xrsim_core::geometry::Vec3;

use crate::block::{channel_count, check_order};
use crate::error::AudioError;
use crate::sh::{acn_degree_order, sh_sn3d};

const HEAD_RADIUS_M: f64 = 0.0875;
const SPEED_OF_SOUND: f64 = 343.0;
/// Level difference between the near and the far ear for a fully lateral
/// source.
const MAX_ILD_DB: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct HrtfSet {
    /// `[left, right]` FIR pair per ambisonic channel, ACN order.
    filters: Vec<[Vec<f64>; 2]>,
    taps: usize,
    sample_rate: u32,
}

impl HrtfSet {
    pub fn new(filters: Vec<[Vec<f64>; 2]>, sample_rate: u32) -> Result<Self, AudioError> {
        let taps = filters.first().map_or(0, |f| f[0].len());
        if taps == 0 {
            return Err(AudioError::Input("HRTF set has no filters".into()));
        }
        for f in filters.iter().flatten() {
            if f.len() != taps {
                return Err(AudioError::Mismatch {
                    what: "HRTF filter length",
                    expected: taps,
                    actual: f.len(),
                });
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(AudioError::Input("non-finite HRTF tap".into()));
            }
        }
        Ok(Self {
            filters,
            taps,
            sample_rate,
        })
    }

    /// Interaural time and level differences for a ring of virtual speakers,
    /// projected onto the spherical harmonics.
    ///
    /// Each speaker reaches each ear as a single impulse, delayed by the
    /// path difference `r(1 − d·e)/c` and attenuated by up to
    /// [`MAX_ILD_DB`] on the far side, where `e` is the ear axis (+y left).
    pub fn synthetic(order: usize, sample_rate: u32, taps: usize) -> Result<Self, AudioError> {
        check_order(order)?;
        let max_delay = (2.0 * HEAD_RADIUS_M / SPEED_OF_SOUND * sample_rate as f64).round() as usize;
        if taps <= max_delay {
            return Err(AudioError::Config(format!(
                "{taps} taps cannot hold the {max_delay}-sample interaural delay"
            )));
        }
        let speakers = fibonacci_sphere(2 * channel_count(order));
        let ears = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, -1.0, 0.0)];
        let mut filters = vec![[vec![0.0; taps], vec![0.0; taps]]; channel_count(order)];
        let inv_count = 1.0 / speakers.len() as f64;
        for d in &speakers {
            let y = sh_sn3d(order, d);
            for (e, ear) in ears.iter().enumerate() {
                let facing = d.dot(ear);
                let delay = (HEAD_RADIUS_M * (1.0 - facing) / SPEED_OF_SOUND * sample_rate as f64).round() as usize;
                let gain = 10f64.powf(-MAX_ILD_DB * (1.0 - facing) / 40.0);
                for (acn, f) in filters.iter_mut().enumerate() {
                    let (l, _) = acn_degree_order(acn);
                    f[e][delay] += inv_count * (2 * l + 1) as f64 * y[acn] * gain;
                }
            }
        }
        Self::new(filters, sample_rate)
    }

    /// Reads a WAV with `2·C` channels, interleaved as left/right per
    /// ambisonic channel. Both PCM16 and float samples are accepted.
    pub fn load_wav(path: impl AsRef<Path>) -> Result<Self, AudioError> {
        let mut reader = WavReader::open(path)?;
        let spec = reader.spec();
        let ch = spec.channels as usize;
        if ch == 0 || !ch.is_multiple_of(2) {
            return Err(AudioError::Input(format!("HRTF file has {ch} channels, expected an even count")));
        }
        let samples: Vec<f64> = match spec.sample_format {
            SampleFormat::Float => reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<Result<_, _>>()?,
            SampleFormat::Int => {
                let full = (1i64 << (spec.bits_per_sample - 1)) as f64;
                reader
                    .samples::<i32>()
                    .map(|s| s.map(|v| v as f64 / full))
                    .collect::<Result<_, _>>()?
            }
        };
        let frames = samples.len() / ch;
        let mut filters = vec![[Vec::with_capacity(frames), Vec::with_capacity(frames)]; ch / 2];
        for frame in samples.chunks_exact(ch) {
            for (k, v) in frame.iter().enumerate() {
                filters[k / 2][k % 2].push(*v);
            }
        }
        Self::new(filters, spec.sample_rate)
    }

    pub fn channels(&self) -> usize {
        self.filters.len()
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn filter(&self, channel: usize, ear: usize) -> &[f64] {
        &self.filters[channel][ear]
    }
}

fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}
