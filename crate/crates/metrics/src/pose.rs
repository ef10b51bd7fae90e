//! Trajectory association, rigid alignment, absolute trajectory error and
//! relative pose error.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use xrsim_core::geometry::{is_unit, Pose, Quat, Vec3};
use xrsim_core::nalgebra::{Matrix3, Rotation3};
use xrsim_core::Timestamp;

use crate::error::MetricsError;
use crate::report::Summary;

/// Largest timestamp gap accepted when pairing estimate and ground truth.
pub const DEFAULT_MAX_GAP: Duration = Duration::from_millis(5);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    samples: Vec<(Timestamp, Pose)>,
}

impl Trajectory {
    /// Timestamps must be strictly increasing and orientations unit.
    pub fn new(samples: Vec<(Timestamp, Pose)>) -> Result<Self, MetricsError> {
        if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(MetricsError::Input(format!("timestamps not increasing at index {}", i + 1)));
        }
        if samples.iter().any(|(_, p)| !is_unit(p.orientation.quaternion())) {
            return Err(MetricsError::Input("orientation is not a unit quaternion".into()));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(Timestamp, Pose)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosePair {
    pub ts: Timestamp,
    pub est: Pose,
    pub gt: Pose,
}

/// Pairs every estimate with the nearest ground-truth sample in time,
/// dropping estimates with no ground truth within `max_gap`.
pub fn associate(est: &Trajectory, gt: &Trajectory, max_gap: Duration) -> Vec<PosePair> {
    let g = gt.samples();
    if g.is_empty() {
        return Vec::new();
    }
    let gap = max_gap.as_nanos() as u64;
    est.samples()
        .iter()
        .filter_map(|&(ts, pose)| {
            let i = g.partition_point(|(t, _)| *t < ts);
            let candidates = [i.checked_sub(1), (i < g.len()).then_some(i)];
            let (dist, j) = candidates
                .into_iter()
                .flatten()
                .map(|j| (g[j].0.as_nanos().abs_diff(ts.as_nanos()), j))
                .min()?;
            (dist <= gap).then_some(PosePair { ts, est: pose, gt: g[j].1 })
        })
        .collect()
}

/// Similarity transform `x ↦ s R x + t` taking estimates onto ground truth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alignment {
    pub rotation: Quat,
    pub translation: Vec3,
    pub scale: f64,
    /// The points do not span a plane, so some rotation is unconstrained.
    pub degenerate: bool,
}

impl Alignment {
    pub fn identity() -> Self {
        Self {
            rotation: Quat::identity(),
            translation: Vec3::zeros(),
            scale: 1.0,
            degenerate: false,
        }
    }

    pub fn apply(&self, p: &Pose) -> Pose {
        Pose::new(
            self.rotation * p.position * self.scale + self.translation,
            self.rotation * p.orientation,
        )
    }

    pub fn apply_pairs(&self, pairs: &[PosePair]) -> Vec<PosePair> {
        pairs
            .iter()
            .map(|p| PosePair {
                est: self.apply(&p.est),
                ..*p
            })
            .collect()
    }
}

/// Least-squares alignment of estimate positions onto ground truth
/// (Umeyama). Rigid unless `with_scale`.
pub fn align_trajectories(pairs: &[PosePair], with_scale: bool) -> Result<Alignment, MetricsError> {
    if pairs.len() < 3 {
        return Err(MetricsError::Input(format!(
            "alignment needs at least 3 associated poses, got {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mu_s = pairs.iter().map(|p| p.est.position).sum::<Vec3>() / n;
    let mu_d = pairs.iter().map(|p| p.gt.position).sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    let mut var_s = 0.0;
    for p in pairs {
        let s = p.est.position - mu_s;
        let d = p.gt.position - mu_d;
        cov += d * s.transpose();
        var_s += s.norm_squared();
    }
    cov /= n;
    var_s /= n;

    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
    let sv = svd.singular_values;
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let largest = sv[order[0]];
    let degenerate = largest <= 0.0 || sv[order[1]] <= 1e-10 * largest;

    let mut fix = Matrix3::identity();
    if (u.determinant() * v_t.determinant()) < 0.0 {
        // Flip the axis with the smallest singular value.
        fix[(order[2], order[2])] = -1.0;
    }
    let r = u * fix * v_t;
    let scale = if with_scale && var_s > 0.0 {
        (0..3).map(|i| sv[i] * fix[(i, i)]).sum::<f64>() / var_s
    } else {
        1.0
    };
    let rotation = Quat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r));
    let translation = mu_d - rotation * mu_s * scale;
    Ok(Alignment {
        rotation,
        translation,
        scale,
        degenerate,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ate {
    pub trans_m: f64,
    pub rot_deg: f64,
    pub pairs: usize,
}

/// Root-mean-square position distance and geodesic angle over the pairs.
pub fn ate(pairs: &[PosePair]) -> Ate {
    if pairs.is_empty() {
        return Ate::default();
    }
    let n = pairs.len() as f64;
    let t = pairs.iter().map(|p| (p.est.position - p.gt.position).norm_squared()).sum::<f64>() / n;
    let r = pairs
        .iter()
        .map(|p| p.est.rotation_angle_to(&p.gt).to_degrees().powi(2))
        .sum::<f64>()
        / n;
    Ate {
        trans_m: t.sqrt(),
        rot_deg: r.sqrt(),
        pairs: pairs.len(),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rpe {
    /// `(start ts, translation error m, rotation error deg)` per pair.
    pub errors: Vec<(Timestamp, f64, f64)>,
    pub trans: Summary,
    pub rot_deg: Summary,
}

/// Relative pose error over a time offset `delta`. Each pair `i` is
/// matched with the first pair at least `delta` later.
pub fn rpe(pairs: &[PosePair], delta: Duration) -> Result<Rpe, MetricsError> {
    if delta.is_zero() {
        return Err(MetricsError::Input("rpe delta must be positive".into()));
    }
    let (Some(first), Some(last)) = (pairs.first(), pairs.last()) else {
        return Err(MetricsError::Input("no associated poses".into()));
    };
    if last.ts.saturating_since(first.ts) < delta {
        return Err(MetricsError::Input("rpe delta exceeds the trajectory span".into()));
    }
    let mut errors = Vec::new();
    for (i, a) in pairs.iter().enumerate() {
        let target = a.ts + delta;
        let j = i + pairs[i..].partition_point(|p| p.ts < target);
        let Some(b) = pairs.get(j) else { break };
        let gt_rel = a.gt.delta_to(&b.gt);
        let est_rel = a.est.delta_to(&b.est);
        let e = gt_rel.delta_to(&est_rel);
        errors.push((a.ts, e.position.norm(), e.orientation.angle().to_degrees()));
    }
    Ok(Rpe {
        trans: Summary::of(errors.iter().map(|e| e.1)),
        rot_deg: Summary::of(errors.iter().map(|e| e.2)),
        errors,
    })
}
