//! Session report and the invariants checked on it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use xrsim_core::ClockMode;
use xrsim_metrics::{FrameStats, QualityReport};

/// Motion-to-photon latency targets for VR and AR, in ms.
pub const VR_TARGET_MS: f64 = 20.0;
pub const AR_TARGET_MS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtpSummary {
    pub records: usize,
    /// Every record satisfies `total = imu_age + reprojection + swap`.
    pub consistent: bool,
    /// IMU period + mean reprojection time + display period.
    pub bound_ms: f64,
    pub vr_target_ms: f64,
    pub ar_target_ms: f64,
    /// Fraction of frames at or under each target.
    pub within_vr: f64,
    pub within_ar: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImageSummary {
    pub width: usize,
    pub height: usize,
    pub sampled: usize,
    /// Sampled vsyncs that showed the previous frame again.
    pub repeated: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AudioSummary {
    pub sample_rate: u32,
    pub frames: usize,
    pub blocks: usize,
    pub peak: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub seed: u64,
    pub clock: ClockMode,
    pub duration_s: f64,
    pub frame_stats: FrameStats,
    pub cpu_share: BTreeMap<String, f64>,
    pub quality: QualityReport,
    pub mtp: MtpSummary,
    pub images: ImageSummary,
    pub audio: AudioSummary,
    /// Files the report was computed from, relative to the session directory.
    pub artifacts: Vec<String>,
    /// Broken invariants; the CLI exits non-zero when this is not empty.
    pub violations: Vec<String>,
}

impl SessionReport {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self).map(|mut s| {
            s.push('\n');
            s
        })
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Plain-text summary for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let q = &self.quality;
        let _ = writeln!(s, "session: {:.1} s, seed {}, {:?} clock", self.duration_s, self.seed, self.clock);
        let _ = writeln!(s, "{:<16} {:>7} {:>7} {:>10} {:>10} {:>9} {:>8}", "component", "runs", "skips", "rate Hz", "target Hz", "mean ms", "miss %");
        for (name, c) in &self.frame_stats.components {
            let target = c.target_hz.map_or_else(|| "-".to_owned(), |t| format!("{t:.1}"));
            let _ = writeln!(
                s,
                "{name:<16} {:>7} {:>7} {:>10.2} {:>10} {:>9.3} {:>8.2}",
                c.invocations,
                c.skipped,
                c.achieved_hz,
                target,
                c.mean_ms,
                c.miss_fraction * 100.0
            );
        }
        let _ = writeln!(
            s,
            "MTP: mean {:.3} ms (std {:.3}, max {:.3}) over {} frames; bound {:.3} ms; within {} ms: {:.1}%, within {} ms: {:.1}%",
            q.mtp_ms.mean,
            q.mtp_ms.std,
            q.mtp_ms.max,
            self.mtp.records,
            self.mtp.bound_ms,
            self.mtp.vr_target_ms,
            self.mtp.within_vr * 100.0,
            self.mtp.ar_target_ms,
            self.mtp.within_ar * 100.0
        );
        let _ = writeln!(
            s,
            "image ({}x{}, {} sampled, {} repeated): SSIM {:.4}, 1-FLIP {:.4}",
            self.images.width, self.images.height, self.images.sampled, self.images.repeated, q.ssim.mean, q.one_minus_flip.mean
        );
        let _ = writeln!(
            s,
            "pose: ATE {:.3e} m / {:.3e} deg, RPE {:.3e} m / {:.3e} deg",
            q.ate_m, q.ate_deg, q.rpe_trans_m.mean, q.rpe_rot_deg.mean
        );
        let _ = writeln!(s, "audio: {} blocks, {} frames, peak {:.3}", self.audio.blocks, self.audio.frames, self.audio.peak);
        if !q.flags.is_empty() {
            let _ = writeln!(s, "flags: {}", q.flags.join(", "));
        }
        for v in &self.violations {
            let _ = writeln!(s, "VIOLATION: {v}");
        }
        s
    }
}
