//! Trajectory CSV: `ts_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz`, one pose per row.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use xrsim_core::geometry::{quat_from_wxyz, Pose, Vec3};
use xrsim_core::Timestamp;

use crate::error::PerceptionError;
use crate::types::{PoseSample, PoseSource};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    ts_ns: u64,
    px: f64,
    py: f64,
    pz: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    vx: f64,
    vy: f64,
    vz: f64,
}

pub fn write_trajectory<W: Write>(out: W, samples: &[PoseSample]) -> Result<(), PerceptionError> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        let p = &s.pose.position;
        let q = s.pose.orientation.quaternion();
        let v = &s.linear_velocity;
        w.serialize(Row {
            ts_ns: s.ts.as_nanos(),
            px: p.x,
            py: p.y,
            pz: p.z,
            qw: q.w,
            qx: q.i,
            qy: q.j,
            qz: q.k,
            vx: v.x,
            vy: v.y,
            vz: v.z,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory, tagging every sample with `source`. Quaternions are
/// renormalized on the way in.
pub fn read_trajectory<R: Read>(input: R, source: PoseSource) -> Result<Vec<PoseSample>, PerceptionError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        let values = [
            row.px, row.py, row.pz, row.qw, row.qx, row.qy, row.qz, row.vx, row.vy, row.vz,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PerceptionError::Input(format!("non-finite value at ts {}", row.ts_ns)));
        }
        out.push(PoseSample::new(
            Pose::new(
                Vec3::new(row.px, row.py, row.pz),
                quat_from_wxyz(row.qw, row.qx, row.qy, row.qz),
            ),
            Timestamp::from_nanos(row.ts_ns),
            source,
            Vec3::new(row.vx, row.vy, row.vz),
        ));
    }
    Ok(out)
}

pub fn save_trajectory(path: impl AsRef<Path>, samples: &[PoseSample]) -> Result<(), PerceptionError> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_trajectory(file, samples)
}

pub fn load_trajectory(path: impl AsRef<Path>, source: PoseSource) -> Result<Vec<PoseSample>, PerceptionError> {
    read_trajectory(std::fs::File::open(path)?, source)
}
