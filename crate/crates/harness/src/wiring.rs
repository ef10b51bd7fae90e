//! Topics, plugins and the data they exchange.
//!
//! ```text
//! camera ──sync──▶ vio_proxy ──▶ vio_pose ┄┄async┄┄▶ integrator
//! imu ────sync──▶ integrator ──▶ integrated_pose ┄┄async┄┄▶ application, reprojection, audio_playback
//! application ──▶ rendered_frame ┄┄async┄┄▶ reprojection ──▶ reprojected_frame
//! audio_encode ──▶ audio_in ──sync──▶ audio_playback ──▶ audio_out
//! ```
//!
//! Plugins do pose-level work only. Pixels are produced after the run, for
//! sampled vsyncs, so simulated sessions stay fast and reproducible.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, Mutex, MutexGuard};

use xrsim_audio::{
    direction, AmbisonicBlock, AudioBlock, AudioEncoder, AudioPlayback, HrtfSet, SourceSpec,
};
use xrsim_core::geometry::{Pose, Quat};
use xrsim_core::{
    OverflowPolicy, PluginDescriptor, PluginError, Runtime, Switchboard, Timestamp,
};
use xrsim_perception::{
    ground_truth_pose, sample_imu, CameraFrame, ImuIntegrator, ImuSample, PoseSample, PoseSource, VioProxy,
};
use xrsim_visual::{predict_pose, HISTORY_WINDOW};

use crate::config::SessionConfig;
use crate::error::HarnessError;

pub const CAMERA: &str = "camera";
pub const IMU: &str = "imu";
pub const VIO_POSE: &str = "vio_pose";
pub const INTEGRATED_POSE: &str = "integrated_pose";
pub const RENDERED_FRAME: &str = "rendered_frame";
pub const REPROJECTED_FRAME: &str = "reprojected_frame";
pub const AUDIO_IN: &str = "audio_in";
pub const AUDIO_OUT: &str = "audio_out";

pub const TOPIC_NAMES: [&str; 8] = [
    CAMERA,
    IMU,
    VIO_POSE,
    INTEGRATED_POSE,
    RENDERED_FRAME,
    REPROJECTED_FRAME,
    AUDIO_IN,
    AUDIO_OUT,
];

pub const PLUGIN_NAMES: [&str; 8] = [
    "camera",
    "imu",
    "vio_proxy",
    "integrator",
    "application",
    "reprojection",
    "audio_encode",
    "audio_playback",
];

/// What the application submitted for one display slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderSubmission {
    pub seq: u64,
    pub render_pose: Pose,
    pub pose_ts: Timestamp,
    pub submit_ts: Timestamp,
}

/// One reprojection: the submitted frame warped to the pose predicted for
/// the next vsync.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisplayFrame {
    pub seq: u64,
    pub start: Timestamp,
    /// Timestamp of the newest integrated pose used.
    pub imu_ts: Timestamp,
    pub render_pose: Pose,
    pub predicted_pose: Pose,
    pub target_ts: Timestamp,
    pub fallback: bool,
}

/// Everything the plugins hand back to the session.
#[derive(Debug, Default)]
pub struct Sinks {
    pub estimated: Vec<PoseSample>,
    pub ground_truth: Vec<PoseSample>,
    pub displays: BTreeMap<u64, DisplayFrame>,
    pub audio: Vec<AudioBlock>,
    pub zoom_clamped: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SharedSinks(Arc<Mutex<Sinks>>);

impl SharedSinks {
    pub fn lock(&self) -> MutexGuard<'_, Sinks> {
        self.0.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn take(&self) -> Sinks {
        std::mem::take(&mut *self.lock())
    }
}

pub struct Wired {
    pub runtime: Runtime,
    pub sinks: SharedSinks,
    /// Target rate per plugin; `None` for triggered plugins.
    pub targets: BTreeMap<String, Option<f64>>,
}

pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn plugin_err(e: impl std::fmt::Display) -> PluginError {
    PluginError::new(e.to_string())
}

/// Audio sources as configured; tones cover the whole session.
pub fn load_sources(config: &SessionConfig) -> Result<Vec<SourceSpec>, HarnessError> {
    let len = (config.duration_s * config.audio.sample_rate as f64).ceil() as usize + config.audio_block;
    config
        .audio
        .sources
        .iter()
        .map(|s| {
            let samples = match &s.path {
                Some(path) => {
                    let (samples, rate) = xrsim_audio::wav::read_mono_pcm16(path)?;
                    if rate != config.audio.sample_rate {
                        return Err(HarnessError::Config(format!(
                            "{} is {rate} Hz, session runs at {} Hz",
                            path.display(),
                            config.audio.sample_rate
                        )));
                    }
                    samples
                }
                None => xrsim_audio::wav::sine_pcm16(s.tone_hz, 1.0, config.audio.sample_rate, len),
            };
            let dir = direction(s.azimuth_deg.to_radians(), s.elevation_deg.to_radians());
            Ok(SourceSpec::new(samples, dir, s.gain)?)
        })
        .collect()
}

/// Builds the switchboard and registers the eight plugins.
pub fn wire_pipelines(config: &SessionConfig) -> Result<Wired, HarnessError> {
    config.validate()?;
    let sb = Arc::new(Switchboard::new(OverflowPolicy::for_mode(config.clock)));
    sb.create_topic::<CameraFrame>(CAMERA)?;
    sb.create_topic::<ImuSample>(IMU)?;
    let vio_t = sb.create_topic::<PoseSample>(VIO_POSE)?;
    let pose_t = sb.create_topic::<PoseSample>(INTEGRATED_POSE)?;
    let frame_t = sb.create_topic::<RenderSubmission>(RENDERED_FRAME)?;
    sb.create_topic::<DisplayFrame>(REPROJECTED_FRAME)?;
    sb.create_topic::<AmbisonicBlock>(AUDIO_IN)?;
    sb.create_topic::<AudioBlock>(AUDIO_OUT)?;

    let mut rt = Runtime::new(Arc::clone(&sb)).with_seed(config.seed);
    let sinks = SharedSinks::default();
    let mut targets = BTreeMap::new();

    let mut trajectory = config.trajectory.clone();
    trajectory.seed = derive_seed(config.seed, trajectory.seed);
    let mut vio_cfg = config.vio.clone();
    vio_cfg.seed = derive_seed(config.seed, vio_cfg.seed ^ 0x5649);

    // camera
    {
        let desc = PluginDescriptor::periodic("camera", config.camera_period())
            .writes(CAMERA)
            .with_cost(config.cost("camera"));
        let w = sb.writer::<CameraFrame>(CAMERA, "camera")?;
        let (seed, cw, ch) = (trajectory.seed, config.camera_width, config.camera_height);
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            let now = ctx.now();
            ctx.publish(&w, CameraFrame::synthesize(seed, now, cw, ch), now);
            Ok(())
        })?;
        targets.insert("camera".to_owned(), Some(config.camera_rate_hz));
    }

    // imu
    {
        let desc = PluginDescriptor::periodic("imu", config.imu_period())
            .writes(IMU)
            .with_cost(config.cost("imu"));
        let w = sb.writer::<ImuSample>(IMU, "imu")?;
        let (spec, noise) = (trajectory.clone(), config.imu_noise);
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            let now = ctx.now();
            ctx.publish(&w, sample_imu(&spec, now, &noise), now);
            Ok(())
        })?;
        targets.insert("imu".to_owned(), Some(config.imu_rate_hz));
    }

    // vio_proxy: its latency is charged as compute time, so the estimate
    // is published when it becomes available
    {
        let desc = PluginDescriptor::triggered("vio_proxy", CAMERA, config.camera_period())
            .writes(VIO_POSE)
            .with_cost(config.cost("vio_proxy"));
        let w = sb.writer::<PoseSample>(VIO_POSE, "vio_proxy")?;
        let spec = trajectory.clone();
        let mut proxy = VioProxy::new(vio_cfg.clone());
        let latency = vio_cfg.latency();
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            let frame = ctx.trigger::<CameraFrame>().ok_or_else(|| plugin_err("missing camera frame"))?;
            let gt = ground_truth_pose(&spec, frame.ts);
            let est = proxy.estimate(&frame.value, &gt).map_err(plugin_err)?;
            ctx.charge(latency);
            ctx.publish(&w, est.sample, est.sample.ts);
            Ok(())
        })?;
        targets.insert("vio_proxy".to_owned(), None);
    }

    // integrator
    {
        let desc = PluginDescriptor::triggered("integrator", IMU, config.imu_period())
            .reads_async(VIO_POSE)
            .writes(INTEGRATED_POSE)
            .with_cost(config.cost("integrator"));
        let w = sb.writer::<PoseSample>(INTEGRATED_POSE, "integrator")?;
        let spec = trajectory.clone();
        let mut integ = ImuIntegrator::new(spec.gravity());
        let mut initial = ground_truth_pose(&spec, Timestamp::ZERO);
        initial.source = PoseSource::GroundTruth;
        integ.set_anchor(initial);
        let mut last_anchor: Option<u64> = None;
        let vio = vio_t.clone();
        let sinks = sinks.clone();
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            let imu = ctx.trigger::<ImuSample>().ok_or_else(|| plugin_err("missing imu sample"))?;
            if let Some(anchor) = vio.read_latest() {
                if last_anchor != Some(anchor.seq) {
                    last_anchor = Some(anchor.seq);
                    integ.set_anchor(anchor.value);
                }
            }
            integ.push_imu(imu.value).map_err(plugin_err)?;
            if let Some(pose) = integ.pose_at(imu.ts).map_err(plugin_err)? {
                ctx.publish(&w, pose, pose.ts);
                let mut s = sinks.lock();
                s.estimated.push(pose);
                s.ground_truth.push(ground_truth_pose(&spec, pose.ts));
            }
            Ok(())
        })?;
        targets.insert("integrator".to_owned(), None);
    }

    // application
    {
        let desc = PluginDescriptor::periodic("application", config.display_period())
            .reads_async(INTEGRATED_POSE)
            .writes(RENDERED_FRAME)
            .with_cost(config.cost("application"));
        let w = sb.writer::<RenderSubmission>(RENDERED_FRAME, "application")?;
        let poses = pose_t.clone();
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            if let Some(p) = poses.read_latest() {
                let now = ctx.now();
                let sub = RenderSubmission {
                    seq: ctx.seq(),
                    render_pose: p.value.pose,
                    pose_ts: p.ts,
                    submit_ts: now,
                };
                ctx.publish(&w, sub, now);
            }
            Ok(())
        })?;
        targets.insert("application".to_owned(), Some(config.display_rate_hz));
    }

    // reprojection
    {
        let desc = PluginDescriptor::periodic("reprojection", config.display_period())
            .reads_async(INTEGRATED_POSE)
            .reads_async(RENDERED_FRAME)
            .writes(REPROJECTED_FRAME)
            .with_cost(config.cost("reprojection"));
        let w = sb.writer::<DisplayFrame>(REPROJECTED_FRAME, "reprojection")?;
        let (poses, frames) = (pose_t.clone(), frame_t.clone());
        let period = config.display_period();
        let mut history: VecDeque<PoseSample> = VecDeque::with_capacity(HISTORY_WINDOW);
        let sinks = sinks.clone();
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            if let Some(p) = poses.read_latest() {
                if history.back().is_none_or(|h| h.ts < p.ts) {
                    if history.len() == HISTORY_WINDOW {
                        history.pop_front();
                    }
                    history.push_back(p.value);
                }
            }
            let (Some(newest), Some(frame)) = (history.back().copied(), frames.read_latest()) else {
                return Ok(());
            };
            let now = ctx.now();
            let target_ts = now + period;
            let hist: Vec<PoseSample> = history.iter().copied().collect();
            let prediction = predict_pose(&hist, target_ts);
            let display = DisplayFrame {
                seq: ctx.seq(),
                start: now,
                imu_ts: newest.ts,
                render_pose: frame.value.render_pose,
                predicted_pose: prediction.pose,
                target_ts,
                fallback: prediction.fallback,
            };
            ctx.publish(&w, display, now);
            sinks.lock().displays.insert(display.seq, display);
            Ok(())
        })?;
        targets.insert("reprojection".to_owned(), Some(config.display_rate_hz));
    }

    // audio_encode
    {
        let desc = PluginDescriptor::periodic("audio_encode", config.audio_period())
            .writes(AUDIO_IN)
            .with_cost(config.cost("audio_encode"));
        let w = sb.writer::<AmbisonicBlock>(AUDIO_IN, "audio_encode")?;
        let mut encoder = AudioEncoder::new(config.audio_config(), load_sources(config)?)?;
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            let block = encoder.next_block().map_err(plugin_err)?;
            ctx.publish(&w, block, ctx.now());
            Ok(())
        })?;
        targets.insert("audio_encode".to_owned(), Some(config.audio_rate_hz));
    }

    // audio_playback
    {
        let desc = PluginDescriptor::triggered("audio_playback", AUDIO_IN, config.audio_period())
            .reads_async(INTEGRATED_POSE)
            .writes(AUDIO_OUT)
            .with_cost(config.cost("audio_playback"));
        let w = sb.writer::<AudioBlock>(AUDIO_OUT, "audio_playback")?;
        let hrtf = match &config.audio.hrtf_path {
            Some(path) => HrtfSet::load_wav(path)?,
            None => HrtfSet::synthetic(config.audio.order, config.audio.sample_rate, config.audio.hrtf_taps)?,
        };
        let mut playback = AudioPlayback::new(&config.audio_config(), &hrtf)?;
        let poses = pose_t.clone();
        let sinks = sinks.clone();
        rt.register_plugin(desc, move |ctx: &mut xrsim_core::InvocationContext<'_>| {
            let block = ctx.trigger::<AmbisonicBlock>().ok_or_else(|| plugin_err("missing audio block"))?;
            let head = poses.read_latest().map_or_else(Quat::identity, |p| p.value.pose.orientation);
            let out = playback.process(&block.value, &head).map_err(plugin_err)?;
            let ts = out.stereo.ts;
            {
                let mut s = sinks.lock();
                s.zoom_clamped |= out.zoom_clamped;
                s.audio.push(out.stereo.clone());
            }
            ctx.publish(&w, out.stereo, ts);
            Ok(())
        })?;
        targets.insert("audio_playback".to_owned(), None);
    }

    Ok(Wired {
        runtime: rt,
        sinks,
        targets,
    })
}
