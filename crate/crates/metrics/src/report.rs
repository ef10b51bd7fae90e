//! Aggregate quality report.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;

/// Mean, population standard deviation and range of a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Self::default();
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self {
            count: v.len(),
            mean,
            std: var.sqrt(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Image, pose and latency quality for one session. SSIM and 1-FLIP
/// samples are clamped to [0, 1] before summarizing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub ssim: Summary,
    pub one_minus_flip: Summary,
    pub ate_m: f64,
    pub ate_deg: f64,
    pub rpe_trans_m: Summary,
    pub rpe_rot_deg: Summary,
    pub mtp_ms: Summary,
    /// Conditions that make some numbers less trustworthy (degenerate
    /// alignment, truncated input and the like).
    pub flags: Vec<String>,
}

impl QualityReport {
    pub fn in_bounds(&self) -> bool {
        let unit = |s: &Summary| s.count == 0 || (0.0..=1.0).contains(&s.min) && (0.0..=1.0).contains(&s.max);
        unit(&self.ssim) && unit(&self.one_minus_flip)
    }

    /// Flat `metric,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MetricsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "value"])?;
        let mut row = |k: String, v: f64| w.write_record([k, v.to_string()]);
        for (name, s) in [
            ("ssim", &self.ssim),
            ("one_minus_flip", &self.one_minus_flip),
            ("rpe_trans_m", &self.rpe_trans_m),
            ("rpe_rot_deg", &self.rpe_rot_deg),
            ("mtp_ms", &self.mtp_ms),
        ] {
            row(format!("{name}.count"), s.count as f64)?;
            row(format!("{name}.mean"), s.mean)?;
            row(format!("{name}.std"), s.std)?;
        }
        row("ate_m".into(), self.ate_m)?;
        row("ate_deg".into(), self.ate_deg)?;
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
