//! Session configuration: TOML schema, validation and `key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use xrsim_core::{period_from_hz, ClockMode, CostModel};
use xrsim_perception::{ImuNoise, TrajectorySpec, VioConfig};

use crate::error::HarnessError;
use crate::wiring::PLUGIN_NAMES;

/// Largest display resolution accepted (2K).
pub const MAX_WIDTH: usize = 2560;
pub const MAX_HEIGHT: usize = 1440;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Seeds the cost models and is mixed into every component seed.
    pub seed: u64,
    pub duration_s: f64,
    pub clock: ClockMode,
    pub camera_rate_hz: f64,
    pub camera_width: usize,
    pub camera_height: usize,
    pub imu_rate_hz: f64,
    pub display_rate_hz: f64,
    /// Audio blocks per second.
    pub audio_rate_hz: f64,
    /// Samples per audio block.
    pub audio_block: usize,
    pub width: usize,
    pub height: usize,
    pub fov_deg: f64,
    pub scene_seed: u64,
    pub quality: QualityConfig,
    pub trajectory: TrajectorySpec,
    pub imu_noise: ImuNoise,
    pub vio: VioConfig,
    pub audio: AudioSettings,
    /// Synthetic compute cost per plugin name.
    pub costs: BTreeMap<String, CostModel>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            duration_s: 10.0,
            clock: ClockMode::Simulated,
            camera_rate_hz: 15.0,
            camera_width: 640,
            camera_height: 480,
            imu_rate_hz: 500.0,
            display_rate_hz: 120.0,
            audio_rate_hz: 48.0,
            audio_block: 1024,
            width: MAX_WIDTH,
            height: MAX_HEIGHT,
            fov_deg: 90.0,
            scene_seed: 7,
            quality: QualityConfig::default(),
            trajectory: TrajectorySpec::default(),
            imu_noise: ImuNoise::default(),
            vio: VioConfig::default(),
            audio: AudioSettings::default(),
            costs: BTreeMap::new(),
        }
    }
}

/// Post-run image quality sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityConfig {
    pub enabled: bool,
    /// Fraction of the display resolution used for quality renders.
    pub scale: f64,
    /// Evaluate every n-th vsync.
    pub every: u64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            scale: 0.125,
            every: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioSettings {
    pub order: usize,
    pub sample_rate: u32,
    pub hrtf_taps: usize,
    /// External FIR set; synthetic filters are used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hrtf_path: Option<PathBuf>,
    pub zoom: f64,
    pub sources: Vec<SourceConfig>,
}

impl Default for AudioSettings {
    fn default() -> Self {
        Self {
            order: 2,
            sample_rate: 48_000,
            hrtf_taps: 256,
            hrtf_path: None,
            zoom: 0.0,
            sources: vec![
                SourceConfig {
                    path: None,
                    tone_hz: 440.0,
                    azimuth_deg: 30.0,
                    elevation_deg: 0.0,
                    gain: 0.5,
                },
                SourceConfig {
                    path: None,
                    tone_hz: 660.0,
                    azimuth_deg: -120.0,
                    elevation_deg: 20.0,
                    gain: 0.3,
                },
            ],
        }
    }
}

/// A mono source: a PCM16 WAV file, or a sine tone when `path` is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub tone_hz: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub gain: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            path: None,
            tone_hz: 440.0,
            azimuth_deg: 0.0,
            elevation_deg: 0.0,
            gain: 0.5,
        }
    }
}

fn in_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), HarnessError> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} = {v} outside [{lo}, {hi}]")))
    }
}

impl SessionConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Applies `key=value` overrides, where `key` is a dotted path such as
    /// `vio.latency_ms`. Values are parsed as TOML, falling back to a bare
    /// string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self, HarnessError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut table: toml::Table = toml::from_str(&self.to_toml_string()?).map_err(|e| HarnessError::Config(e.to_string()))?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("override `{item}` is not key=value")))?;
            let value = parse_value(raw.trim());
            set_path(&mut table, key.trim(), value)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        in_range("duration_s", self.duration_s, 1e-3, 3600.0)?;
        in_range("camera_rate_hz", self.camera_rate_hz, 15.0, 100.0)?;
        in_range("imu_rate_hz", self.imu_rate_hz, 1.0, 800.0)?;
        in_range("display_rate_hz", self.display_rate_hz, 30.0, 144.0)?;
        in_range("audio_rate_hz", self.audio_rate_hz, 48.0, 96.0)?;
        in_range("audio_block", self.audio_block as f64, 256.0, 2048.0)?;
        in_range("width", self.width as f64, 16.0, MAX_WIDTH as f64)?;
        in_range("height", self.height as f64, 16.0, MAX_HEIGHT as f64)?;
        in_range("camera_width", self.camera_width as f64, 16.0, MAX_WIDTH as f64)?;
        in_range("camera_height", self.camera_height as f64, 16.0, MAX_HEIGHT as f64)?;
        in_range("fov_deg", self.fov_deg, 1.0, 179.0)?;
        in_range("quality.scale", self.quality.scale, 1e-3, 1.0)?;
        if self.quality.every == 0 {
            return Err(HarnessError::Config("quality.every must be at least 1".into()));
        }
        let (qw, qh) = self.quality_dims();
        if qw < 16 || qh < 16 {
            return Err(HarnessError::Config(format!("quality render {qw}x{qh} is too small")));
        }
        self.trajectory.validate().map_err(HarnessError::Config)?;
        self.vio.validate().map_err(HarnessError::Config)?;
        let n = &self.imu_noise;
        if !(n.gyro_sigma.is_finite() && n.accel_sigma.is_finite() && n.gyro_sigma >= 0.0 && n.accel_sigma >= 0.0) {
            return Err(HarnessError::Config("imu noise must be finite and non-negative".into()));
        }
        self.audio_config().validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.audio.sources.is_empty() {
            return Err(HarnessError::Config("at least one audio source is required".into()));
        }
        for s in &self.audio.sources {
            if s.path.is_none() {
                in_range("audio source tone_hz", s.tone_hz, 0.0, self.audio.sample_rate as f64 / 2.0)?;
            }
            if !(s.azimuth_deg.is_finite() && s.elevation_deg.is_finite() && s.gain.is_finite()) {
                return Err(HarnessError::Config("audio source fields must be finite".into()));
            }
        }
        for (name, cost) in &self.costs {
            if !PLUGIN_NAMES.contains(&name.as_str()) {
                return Err(HarnessError::Config(format!("cost for unknown plugin `{name}`")));
            }
            cost.validate().map_err(HarnessError::Config)?;
        }
        Ok(())
    }

    pub fn duration(&self) -> Duration {
        Duration::from_nanos((self.duration_s * 1e9).round() as u64)
    }

    pub fn camera_period(&self) -> Duration {
        period_from_hz(self.camera_rate_hz)
    }

    pub fn imu_period(&self) -> Duration {
        period_from_hz(self.imu_rate_hz)
    }

    pub fn display_period(&self) -> Duration {
        period_from_hz(self.display_rate_hz)
    }

    pub fn audio_period(&self) -> Duration {
        period_from_hz(self.audio_rate_hz)
    }

    pub fn quality_dims(&self) -> (usize, usize) {
        let s = self.quality.scale;
        (
            (self.width as f64 * s).round() as usize,
            (self.height as f64 * s).round() as usize,
        )
    }

    pub fn audio_config(&self) -> xrsim_audio::AudioConfig {
        xrsim_audio::AudioConfig {
            order: self.audio.order,
            block_size: self.audio_block,
            sample_rate: self.audio.sample_rate,
            hrtf_taps: self.audio.hrtf_taps,
            zoom: self.audio.zoom,
        }
    }

    pub fn cost(&self, plugin: &str) -> CostModel {
        self.costs.get(plugin).copied().unwrap_or_default()
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), HarnessError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| HarnessError::Config(format!("empty override key `{key}`")))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p.to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("`{p}` in `{key}` is not a table")))?;
    }
    // integers given for float fields are accepted by the deserializer, but
    // keep floats as floats when the existing value is one
    let value = match (cur.get(last), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) => v,
    };
    cur.insert(last.to_owned(), value);
    Ok(())
}
