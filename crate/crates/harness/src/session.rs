//! Running a session, writing its outputs and analysing a session directory.
//!
//! A session directory holds:
//!
//! | file | contents |
//! |---|---|
//! | `config.toml` | the effective configuration |
//! | `trace.csv` | one row per plugin invocation or skipped slot |
//! | `mtp.csv` | motion-to-photon split per displayed frame |
//! | `trajectory_est.csv`, `trajectory_gt.csv` | integrated and true poses |
//! | `frames/index.csv` | sampled vsyncs and the frame shown at each |
//! | `frames/*.ppm` | displayed and reference images for those vsyncs |
//! | `audio_out.wav` | binaural output, PCM16 |
//! | `report.json` | the [`SessionReport`] |
//!
//! [`run_session`] writes all of it; [`analyze`] computes the report from the
//! files alone, which is also what [`replay`] does.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use xrsim_core::image::{read_ppm, write_ppm, RgbImage};
use xrsim_core::{trace, Clock, InvocationRecord, Timestamp};
use xrsim_metrics::{
    align_trajectories, associate, ate, cpu_attribution, flip, frame_stats, next_vsync, record_mtp, rpe, ssim,
    write_mtp_csv, MtpRecord, QualityReport, Summary, Trajectory, DEFAULT_MAX_GAP, DEFAULT_PPD,
};
use xrsim_perception::{ground_truth_pose, read_trajectory, save_trajectory, PoseSample, PoseSource};
use xrsim_visual::{render_app, reproject, CameraModel};

use crate::config::SessionConfig;
use crate::error::HarnessError;
use crate::report::{AudioSummary, ImageSummary, MtpSummary, SessionReport, AR_TARGET_MS, VR_TARGET_MS};
use crate::wiring::{derive_seed, wire_pipelines, DisplayFrame, PLUGIN_NAMES};

pub const CONFIG_FILE: &str = "config.toml";
pub const TRACE_FILE: &str = "trace.csv";
pub const MTP_FILE: &str = "mtp.csv";
pub const EST_FILE: &str = "trajectory_est.csv";
pub const GT_FILE: &str = "trajectory_gt.csv";
pub const FRAMES_DIR: &str = "frames";
pub const FRAME_INDEX: &str = "frames/index.csv";
pub const AUDIO_FILE: &str = "audio_out.wav";
pub const REPORT_FILE: &str = "report.json";
pub const QUALITY_FILE: &str = "quality.csv";

/// Interval for relative pose error.
pub const RPE_DELTA: Duration = Duration::from_secs(1);

fn create(path: &Path) -> Result<BufWriter<fs::File>, HarnessError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn write_trace(path: &Path, records: &[InvocationRecord]) -> Result<(), HarnessError> {
    let mut f = create(path)?;
    trace::write_csv(records, &mut f)?;
    f.flush().map_err(|e| HarnessError::io(path, e))
}

/// Target rate per plugin, `None` for triggered ones.
pub fn rate_targets(config: &SessionConfig) -> BTreeMap<String, Option<f64>> {
    let rate = |name: &str| match name {
        "camera" => Some(config.camera_rate_hz),
        "imu" => Some(config.imu_rate_hz),
        "application" | "reprojection" => Some(config.display_rate_hz),
        "audio_encode" => Some(config.audio_rate_hz),
        _ => None,
    };
    PLUGIN_NAMES.iter().map(|n| (n.to_string(), rate(n))).collect()
}

/// MTP for every completed reprojection that produced a frame. Pixels
/// appear at the first vsync strictly after the reprojection finishes.
pub fn mtp_records(
    trace: &[InvocationRecord],
    displays: &BTreeMap<u64, DisplayFrame>,
    display_period: Duration,
) -> Result<Vec<MtpRecord>, HarnessError> {
    let mut out = Vec::new();
    for r in trace.iter().filter(|r| r.plugin == "reprojection" && !r.skipped) {
        let Some(d) = displays.get(&r.seq) else { continue };
        let pixels = next_vsync(r.end + Duration::from_nanos(1), display_period);
        out.push(record_mtp(r.seq, d.imu_ts, r.start, r.end, pixels)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct SampledFrame {
    vsync: u64,
    ts: Timestamp,
    seq: u64,
    repeated: bool,
}

fn sample_frames(config: &SessionConfig, mtp: &[MtpRecord]) -> Vec<SampledFrame> {
    let period = config.display_period().as_nanos() as u64;
    let horizon = config.duration().as_nanos() as u64;
    let mut shown: Vec<&MtpRecord> = mtp.iter().collect();
    shown.sort_by_key(|r| (r.ts, r.seq));
    let mut out = Vec::new();
    let mut v = config.quality.every;
    while v * period < horizon {
        let ts = Timestamp::from_nanos(v * period);
        let idx = shown.partition_point(|r| r.ts <= ts);
        if idx > 0 {
            let r = shown[idx - 1];
            out.push(SampledFrame {
                vsync: v,
                ts,
                seq: r.seq,
                repeated: r.ts < ts,
            });
        }
        v += config.quality.every;
    }
    out
}

fn frame_names(vsync: u64) -> (String, String) {
    (
        format!("{FRAMES_DIR}/frame_{vsync:06}_display.ppm"),
        format!("{FRAMES_DIR}/frame_{vsync:06}_reference.ppm"),
    )
}

fn save_ppm(path: &Path, img: &RgbImage) -> Result<(), HarnessError> {
    let mut f = create(path)?;
    write_ppm(img, &mut f).map_err(|e| HarnessError::io(path, e))?;
    f.flush().map_err(|e| HarnessError::io(path, e))
}

/// Renders the displayed and the ideal image for each sampled vsync.
fn write_quality_frames(
    dir: &Path,
    config: &SessionConfig,
    mtp: &[MtpRecord],
    displays: &BTreeMap<u64, DisplayFrame>,
) -> Result<(), HarnessError> {
    let mut trajectory = config.trajectory.clone();
    trajectory.seed = derive_seed(config.seed, trajectory.seed);
    let (w, h) = config.quality_dims();
    let cam = CameraModel::from_fov(w, h, config.fov_deg);
    let mut index = String::from("vsync,ts_ns,seq,repeated\n");
    if config.quality.enabled {
        for s in sample_frames(config, mtp) {
            let d = &displays[&s.seq];
            let rendered = render_app(config.scene_seed, &d.render_pose, &cam);
            let shown = reproject(&rendered, &d.predicted_pose, &cam);
            let truth = ground_truth_pose(&trajectory, s.ts);
            let reference = render_app(config.scene_seed, &truth.pose, &cam).image;
            let (dn, rn) = frame_names(s.vsync);
            save_ppm(&dir.join(dn), &shown)?;
            save_ppm(&dir.join(rn), &reference)?;
            let _ = writeln!(index, "{},{},{},{}", s.vsync, s.ts.as_nanos(), s.seq, s.repeated);
        }
    }
    write_text(&dir.join(FRAME_INDEX), &index)
}

/// Runs a session and writes its directory. A failing component aborts the
/// run; the partial trace is still written before the error is returned.
pub fn run_session(config: &SessionConfig, dir: &Path) -> Result<SessionReport, HarnessError> {
    config.validate()?;
    fs::create_dir_all(dir.join(FRAMES_DIR)).map_err(|e| HarnessError::io(dir, e))?;
    write_text(&dir.join(CONFIG_FILE), &config.to_toml_string()?)?;
    let mut wired = wire_pipelines(config)?;
    let mut clock = Clock::new(config.clock);
    let trace = match wired.runtime.run(&mut clock, config.duration()) {
        Ok(t) => t,
        Err(e) => {
            write_trace(&dir.join(TRACE_FILE), &e.partial)?;
            return Err(e.into());
        }
    };
    write_trace(&dir.join(TRACE_FILE), &trace)?;
    let sinks = wired.sinks.take();
    save_trajectory(dir.join(EST_FILE), &sinks.estimated)?;
    save_trajectory(dir.join(GT_FILE), &sinks.ground_truth)?;

    let mtp = mtp_records(&trace, &sinks.displays, config.display_period())?;
    let mut f = create(&dir.join(MTP_FILE))?;
    write_mtp_csv(&mut f, &mtp)?;
    f.flush().map_err(|e| HarnessError::io(dir, e))?;

    write_quality_frames(dir, config, &mtp, &sinks.displays)?;

    let channels = [
        sinks.audio.iter().flat_map(|b| b.samples[0].iter().copied()).collect::<Vec<f64>>(),
        sinks.audio.iter().flat_map(|b| b.samples[1].iter().copied()).collect::<Vec<f64>>(),
    ];
    if !channels[0].is_empty() {
        xrsim_audio::wav::write_pcm16(dir.join(AUDIO_FILE), &channels, config.audio.sample_rate)?;
    }

    let report = analyze(dir)?;
    write_report(dir, &report)?;
    Ok(report)
}

fn write_report(dir: &Path, report: &SessionReport) -> Result<(), HarnessError> {
    write_text(&dir.join(REPORT_FILE), &report.to_json()?)?;
    let mut f = create(&dir.join(QUALITY_FILE))?;
    report.quality.write_csv(&mut f)?;
    f.flush().map_err(|e| HarnessError::io(dir, e))
}

/// Recomputes the report of a recorded session into `out`. Missing or
/// truncated inputs give a partial report with flags set.
pub fn replay(dataset: &Path, out: &Path) -> Result<SessionReport, HarnessError> {
    let report = analyze(dataset)?;
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    write_report(out, &report)?;
    Ok(report)
}

/// Trajectory rows that parse; the second value counts rejected lines.
fn read_trajectory_lenient(path: &Path, source: PoseSource) -> Result<(Vec<PoseSample>, usize), HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "ts_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz" {
        return Err(HarnessError::Dataset(format!("{}: unexpected header `{header}`", path.display())));
    }
    let mut kept = String::from(header);
    kept.push('\n');
    let mut dropped = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let ok = fields.len() == 11
            && fields[0].parse::<u64>().is_ok()
            && fields[1..].iter().all(|f| f.parse::<f64>().is_ok_and(f64::is_finite));
        if ok {
            kept.push_str(line);
            kept.push('\n');
        } else {
            dropped += 1;
        }
    }
    Ok((read_trajectory(kept.as_bytes(), source)?, dropped))
}

fn read_mtp(path: &Path) -> Result<Vec<MtpRecord>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("seq,ts_ns,imu_age_ns,reprojection_ns,swap_ns,total_ns") {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        return Err(HarnessError::Dataset(format!("{}: unexpected header", path.display())));
    }
    lines
        .map(|line| {
            let v: Vec<u64> = line
                .split(',')
                .map(|f| f.parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|_| HarnessError::Dataset(format!("bad mtp row `{line}`")))?;
            if v.len() != 6 {
                return Err(HarnessError::Dataset(format!("bad mtp row `{line}`")));
            }
            let d = Duration::from_nanos;
            Ok(MtpRecord {
                seq: v[0],
                ts: Timestamp::from_nanos(v[1]),
                t_imu_age: d(v[2]),
                t_reprojection: d(v[3]),
                t_swap: d(v[4]),
                total: d(v[5]),
            })
        })
        .collect()
}

fn load_image(path: &Path) -> Result<RgbImage, HarnessError> {
    let f = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_ppm(BufReader::new(f)).map_err(|e| HarnessError::io(path, e))
}

struct ImageQuality {
    ssim: Vec<f64>,
    one_minus_flip: Vec<f64>,
    summary: ImageSummary,
}

fn image_quality(dir: &Path, flags: &mut Vec<String>, artifacts: &mut Vec<String>) -> Result<ImageQuality, HarnessError> {
    let mut q = ImageQuality {
        ssim: Vec::new(),
        one_minus_flip: Vec::new(),
        summary: ImageSummary::default(),
    };
    let index_path = dir.join(FRAME_INDEX);
    let Ok(index) = fs::read_to_string(&index_path) else {
        flags.push("frames_missing".into());
        return Ok(q);
    };
    artifacts.push(FRAME_INDEX.into());
    for line in index.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let (Some(vsync), Some(repeated)) = (
            fields.first().and_then(|f| f.parse::<u64>().ok()),
            fields.get(3).and_then(|f| f.parse::<bool>().ok()),
        ) else {
            return Err(HarnessError::Dataset(format!("bad frame index row `{line}`")));
        };
        let (dn, rn) = frame_names(vsync);
        let (Ok(shown), Ok(reference)) = (load_image(&dir.join(&dn)), load_image(&dir.join(&rn))) else {
            if !flags.iter().any(|f| f == "frames_incomplete") {
                flags.push("frames_incomplete".into());
            }
            continue;
        };
        q.ssim.push(ssim(&reference, &shown)?.clamp(0.0, 1.0));
        q.one_minus_flip.push((1.0 - flip(&reference, &shown, DEFAULT_PPD)?).clamp(0.0, 1.0));
        q.summary.width = reference.width();
        q.summary.height = reference.height();
        q.summary.sampled += 1;
        q.summary.repeated += usize::from(repeated);
        artifacts.push(dn);
        artifacts.push(rn);
    }
    Ok(q)
}

fn audio_summary(dir: &Path, config: &SessionConfig, flags: &mut Vec<String>, artifacts: &mut Vec<String>) -> Result<AudioSummary, HarnessError> {
    let path = dir.join(AUDIO_FILE);
    if !path.exists() {
        flags.push("audio_missing".into());
        return Ok(AudioSummary::default());
    }
    let mut reader = hound::WavReader::open(&path).map_err(xrsim_audio::AudioError::from)?;
    let spec = reader.spec();
    let samples: Vec<i16> = reader
        .samples::<i16>()
        .collect::<Result<_, _>>()
        .map_err(xrsim_audio::AudioError::from)?;
    artifacts.push(AUDIO_FILE.into());
    let frames = samples.len() / spec.channels.max(1) as usize;
    Ok(AudioSummary {
        sample_rate: spec.sample_rate,
        frames,
        blocks: frames / config.audio_block,
        peak: samples.iter().map(|&s| (s as f64 / 32768.0).abs()).fold(0.0, f64::max),
    })
}

/// Computes the report for a session directory from its files alone.
pub fn analyze(dir: &Path) -> Result<SessionReport, HarnessError> {
    let config = SessionConfig::load(dir.join(CONFIG_FILE))?;
    let mut flags = Vec::new();
    let mut violations = Vec::new();
    let mut artifacts = vec![CONFIG_FILE.to_owned()];

    let trace_path = dir.join(TRACE_FILE);
    let trace_file = fs::File::open(&trace_path).map_err(|e| HarnessError::io(&trace_path, e))?;
    let trace = trace::read_csv(BufReader::new(trace_file))?;
    artifacts.push(TRACE_FILE.into());
    let targets = rate_targets(&config);
    let stats = frame_stats(&trace, &targets, config.duration())?;
    for name in targets.keys() {
        if stats.components.get(name).is_none_or(|c| c.invocations == 0) {
            violations.push(format!("component `{name}` never ran"));
        }
    }

    // pose error
    let mut quality = QualityReport::default();
    let (est, est_dropped) = read_trajectory_lenient(&dir.join(EST_FILE), PoseSource::Integrator)?;
    let (gt, gt_dropped) = read_trajectory_lenient(&dir.join(GT_FILE), PoseSource::GroundTruth)?;
    artifacts.push(EST_FILE.into());
    artifacts.push(GT_FILE.into());
    if est_dropped + gt_dropped > 0 {
        flags.push(format!("trajectory_rows_rejected:{}", est_dropped + gt_dropped));
    }
    if est.len() != gt.len() {
        flags.push("trajectory_truncated".into());
    }
    let to_traj = |s: &[PoseSample]| Trajectory::new(s.iter().map(|p| (p.ts, p.pose)).collect());
    let pairs = associate(&to_traj(&est)?, &to_traj(&gt)?, DEFAULT_MAX_GAP);
    if pairs.len() < 3 {
        flags.push("trajectory_too_short".into());
    } else {
        let alignment = align_trajectories(&pairs, false)?;
        if alignment.degenerate {
            flags.push("alignment_degenerate".into());
        }
        let e = ate(&alignment.apply_pairs(&pairs));
        quality.ate_m = e.trans_m;
        quality.ate_deg = e.rot_deg;
        match rpe(&pairs, RPE_DELTA) {
            Ok(r) => {
                quality.rpe_trans_m = r.trans;
                quality.rpe_rot_deg = r.rot_deg;
            }
            Err(_) => flags.push("rpe_unavailable".into()),
        }
    }

    // latency
    let mtp_path = dir.join(MTP_FILE);
    let mtp = if mtp_path.exists() {
        artifacts.push(MTP_FILE.into());
        read_mtp(&mtp_path)?
    } else {
        flags.push("mtp_missing".into());
        Vec::new()
    };
    let consistent = mtp.iter().all(MtpRecord::is_consistent);
    if !consistent {
        violations.push("motion-to-photon records do not add up".into());
    }
    if mtp.is_empty() {
        violations.push("no frames were displayed".into());
    }
    quality.mtp_ms = Summary::of(mtp.iter().map(MtpRecord::total_ms));
    let within = |limit: f64| {
        if mtp.is_empty() {
            0.0
        } else {
            mtp.iter().filter(|r| r.total_ms() <= limit).count() as f64 / mtp.len() as f64
        }
    };
    let reproj_mean = stats.components.get("reprojection").map_or(0.0, |c| c.mean_ms);
    let ms = |d: Duration| d.as_nanos() as f64 / 1e6;
    let mtp_summary = MtpSummary {
        records: mtp.len(),
        consistent,
        bound_ms: ms(config.imu_period()) + reproj_mean + ms(config.display_period()),
        vr_target_ms: VR_TARGET_MS,
        ar_target_ms: AR_TARGET_MS,
        within_vr: within(VR_TARGET_MS),
        within_ar: within(AR_TARGET_MS),
    };

    // images
    let images = image_quality(dir, &mut flags, &mut artifacts)?;
    quality.ssim = Summary::of(images.ssim);
    quality.one_minus_flip = Summary::of(images.one_minus_flip);
    if !quality.in_bounds() {
        violations.push("image quality outside [0, 1]".into());
    }

    let audio = audio_summary(dir, &config, &mut flags, &mut artifacts)?;
    if config.audio.zoom.abs() > 1.0 {
        flags.push("audio_zoom_clamped".into());
    }

    quality.flags = flags;
    Ok(SessionReport {
        seed: config.seed,
        clock: config.clock,
        duration_s: config.duration_s,
        cpu_share: cpu_attribution(&trace),
        frame_stats: stats,
        quality,
        mtp: mtp_summary,
        images: images.summary,
        audio,
        artifacts,
        violations,
    })
}

/// Loads `report.json` from a session directory.
pub fn load_report(dir: &Path) -> Result<SessionReport, HarnessError> {
    let path: PathBuf = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    Ok(SessionReport::from_json(&text)?)
}
