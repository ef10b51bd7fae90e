//! PCM16 WAV input for sources and output for rendered audio.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::AudioError;

/// Reads a mono 16-bit WAV. Returns the samples and the sample rate.
pub fn read_mono_pcm16(path: impl AsRef<Path>) -> Result<(Vec<i16>, u32), AudioError> {
    let mut reader = WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != SampleFormat::Int {
        return Err(AudioError::Input(format!(
            "expected mono PCM16, got {} channel(s) of {}-bit {:?}",
            spec.channels, spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = reader.samples::<i16>().collect::<Result<Vec<_>, _>>()?;
    Ok((samples, spec.sample_rate))
}

/// Float sample to PCM16, clipping to the representable range.
pub fn to_pcm16(v: f64) -> i16 {
    (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Writes channel-major float samples as interleaved PCM16.
pub fn write_pcm16(path: impl AsRef<Path>, channels: &[Vec<f64>], sample_rate: u32) -> Result<(), AudioError> {
    let len = channels.first().map_or(0, Vec::len);
    if channels.is_empty() || channels.iter().any(|c| c.len() != len) {
        return Err(AudioError::Input("channels must be non-empty and equally long".into()));
    }
    let spec = WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec)?;
    for i in 0..len {
        for c in channels {
            writer.write_sample(to_pcm16(c[i]))?;
        }
    }
    writer.finalize()?;
    Ok(())
}

/// Test tone as PCM16, handy for default sessions without source files.
pub fn sine_pcm16(freq_hz: f64, amplitude: f64, sample_rate: u32, len: usize) -> Vec<i16> {
    (0..len)
        .map(|i| to_pcm16(amplitude * (2.0 * std::f64::consts::PI * freq_hz * i as f64 / sample_rate as f64).sin()))
        .collect()
}
