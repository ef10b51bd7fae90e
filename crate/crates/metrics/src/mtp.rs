//! Motion-to-photon latency: the age of the reprojected frame's pose when
//! its pixels start to appear. Display scan-out time is not included.

use std::io::Write;
use std::time::Duration;

use serde::Serialize;
use xrsim_core::Timestamp;

use crate::error::MetricsError;

/// Latency split for one displayed frame. Durations are whole nanoseconds,
/// so `total` is exactly the sum of the three parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MtpRecord {
    pub seq: u64,
    /// When the pixels started to appear.
    pub ts: Timestamp,
    pub t_imu_age: Duration,
    pub t_reprojection: Duration,
    pub t_swap: Duration,
    pub total: Duration,
}

fn ms(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1e6
}

impl MtpRecord {
    pub fn imu_age_ms(&self) -> f64 {
        ms(self.t_imu_age)
    }

    pub fn reprojection_ms(&self) -> f64 {
        ms(self.t_reprojection)
    }

    pub fn swap_ms(&self) -> f64 {
        ms(self.t_swap)
    }

    pub fn total_ms(&self) -> f64 {
        ms(self.total)
    }

    pub fn is_consistent(&self) -> bool {
        self.t_imu_age + self.t_reprojection + self.t_swap == self.total
    }
}

pub fn record_mtp(
    seq: u64,
    imu_sample_ts: Timestamp,
    reproj_start: Timestamp,
    reproj_end: Timestamp,
    pixels_start_ts: Timestamp,
) -> Result<MtpRecord, MetricsError> {
    if !(imu_sample_ts <= reproj_start && reproj_start <= reproj_end && reproj_end <= pixels_start_ts) {
        return Err(MetricsError::Input(format!(
            "timestamps out of order: imu {imu_sample_ts}, start {reproj_start}, end {reproj_end}, pixels {pixels_start_ts}"
        )));
    }
    let t_imu_age = reproj_start.saturating_since(imu_sample_ts);
    let t_reprojection = reproj_end.saturating_since(reproj_start);
    let t_swap = pixels_start_ts.saturating_since(reproj_end);
    Ok(MtpRecord {
        seq,
        ts: pixels_start_ts,
        t_imu_age,
        t_reprojection,
        t_swap,
        total: t_imu_age + t_reprojection + t_swap,
    })
}

/// First vsync at or after `t` for a display refreshing every `period`.
pub fn next_vsync(t: Timestamp, period: Duration) -> Timestamp {
    let p = period.as_nanos() as u64;
    let n = t.as_nanos();
    Timestamp::from_nanos(n.div_ceil(p) * p)
}

#[derive(Serialize)]
struct Row {
    seq: u64,
    ts_ns: u64,
    imu_age_ns: u64,
    reprojection_ns: u64,
    swap_ns: u64,
    total_ns: u64,
}

pub fn write_mtp_csv<W: Write>(out: W, records: &[MtpRecord]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    let ns = |d: Duration| d.as_nanos() as u64;
    for r in records {
        w.serialize(Row {
            seq: r.seq,
            ts_ns: r.ts.as_nanos(),
            imu_age_ns: ns(r.t_imu_age),
            reprojection_ns: ns(r.t_reprojection),
            swap_ns: ns(r.t_swap),
            total_ns: ns(r.total),
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
