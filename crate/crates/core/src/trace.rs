use std::io::{Read, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::RuntimeError;
use crate::time::Timestamp;

/// Timing of one plugin invocation (or one skipped periodic slot).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvocationRecord {
    pub plugin: String,
    pub seq: u64,
    pub start: Timestamp,
    pub end: Timestamp,
    pub cpu_time: Duration,
    pub deadline_met: bool,
    pub skipped: bool,
}

impl InvocationRecord {
    pub fn completed(plugin: &str, seq: u64, start: Timestamp, end: Timestamp, cpu_time: Duration, deadline: Duration) -> Self {
        Self {
            plugin: plugin.to_owned(),
            seq,
            start,
            end,
            cpu_time,
            deadline_met: end.saturating_since(start) <= deadline,
            skipped: false,
        }
    }

    pub fn skipped(plugin: &str, seq: u64, slot: Timestamp) -> Self {
        Self {
            plugin: plugin.to_owned(),
            seq,
            start: slot,
            end: slot,
            cpu_time: Duration::ZERO,
            deadline_met: true,
            skipped: true,
        }
    }

    pub fn wall_time(&self) -> Duration {
        self.end.saturating_since(self.start)
    }
}

#[derive(Serialize, Deserialize)]
struct TraceRow {
    plugin: String,
    seq: u64,
    start_ns: u64,
    end_ns: u64,
    cpu_ns: u64,
    deadline_met: bool,
    skipped: bool,
}

/// Writes the trace as CSV with columns
/// `plugin,seq,start_ns,end_ns,cpu_ns,deadline_met,skipped`.
pub fn write_csv<W: Write>(records: &[InvocationRecord], out: W) -> Result<(), RuntimeError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(TraceRow {
            plugin: r.plugin.clone(),
            seq: r.seq,
            start_ns: r.start.as_nanos(),
            end_ns: r.end.as_nanos(),
            cpu_ns: r.cpu_time.as_nanos() as u64,
            deadline_met: r.deadline_met,
            skipped: r.skipped,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<InvocationRecord>, RuntimeError> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize::<TraceRow>()
        .map(|row| {
            let row = row?;
            Ok(InvocationRecord {
                plugin: row.plugin,
                seq: row.seq,
                start: Timestamp::from_nanos(row.start_ns),
                end: Timestamp::from_nanos(row.end_ns),
                cpu_time: Duration::from_nanos(row.cpu_ns),
                deadline_met: row.deadline_met,
                skipped: row.skipped,
            })
        })
        .collect()
}
