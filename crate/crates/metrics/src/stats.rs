//! Per-component timing statistics and CPU-time shares.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use xrsim_core::InvocationRecord;

use crate::error::MetricsError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    /// Completed (non-skipped) invocations.
    pub invocations: usize,
    pub skipped: usize,
    pub achieved_hz: f64,
    /// `None` for components without a rate of their own.
    pub target_hz: Option<f64>,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub miss_fraction: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub components: BTreeMap<String, ComponentStats>,
}

/// Statistics over completed invocations of each component, over a session
/// of length `duration`. Components listed in `targets` but absent from the
/// trace appear with zero counts.
pub fn frame_stats(
    trace: &[InvocationRecord],
    targets: &BTreeMap<String, Option<f64>>,
    duration: Duration,
) -> Result<FrameStats, MetricsError> {
    if trace.is_empty() {
        return Err(MetricsError::Input("trace is empty".into()));
    }
    if duration.is_zero() {
        return Err(MetricsError::Input("session duration must be positive".into()));
    }
    let secs = duration.as_secs_f64();
    let mut by_name: BTreeMap<&str, Vec<&InvocationRecord>> = BTreeMap::new();
    for name in targets.keys() {
        by_name.entry(name.as_str()).or_default();
    }
    for r in trace {
        by_name.entry(r.plugin.as_str()).or_default().push(r);
    }
    let components = by_name
        .into_iter()
        .map(|(name, recs)| {
            let done: Vec<_> = recs.iter().filter(|r| !r.skipped).collect();
            let n = done.len();
            let wall: Vec<f64> = done.iter().map(|r| r.wall_time().as_nanos() as f64 / 1e6).collect();
            let (mean, std) = if n == 0 {
                (0.0, 0.0)
            } else {
                let mean = wall.iter().sum::<f64>() / n as f64;
                let var = wall.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n as f64;
                (mean, var.sqrt())
            };
            let missed = done.iter().filter(|r| !r.deadline_met).count();
            let stats = ComponentStats {
                invocations: n,
                skipped: recs.len() - n,
                achieved_hz: n as f64 / secs,
                target_hz: targets.get(name).copied().flatten(),
                mean_ms: mean,
                std_ms: std,
                miss_fraction: if n == 0 { 0.0 } else { missed as f64 / n as f64 },
            };
            (name.to_owned(), stats)
        })
        .collect();
    Ok(FrameStats { components })
}

/// Each component's share of the total CPU time. With no CPU time recorded
/// at all the shares are equal.
pub fn cpu_attribution(trace: &[InvocationRecord]) -> BTreeMap<String, f64> {
    let mut totals: BTreeMap<String, u128> = BTreeMap::new();
    for r in trace {
        *totals.entry(r.plugin.clone()).or_default() += r.cpu_time.as_nanos();
    }
    let sum: u128 = totals.values().sum();
    let n = totals.len() as f64;
    totals
        .into_iter()
        .map(|(k, v)| {
            let share = if sum == 0 { 1.0 / n } else { v as f64 / sum as f64 };
            (k, share)
        })
        .collect()
}
