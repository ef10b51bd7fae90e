use std::time::Duration;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

/// Synthetic compute cost charged to a plugin invocation, in milliseconds.
///
/// Samples are clamped at zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CostModel {
    #[default]
    Zero,
    Constant {
        ms: f64,
    },
    Normal {
        mean_ms: f64,
        std_ms: f64,
    },
    /// Log-normal with the given mean and standard deviation of the cost itself.
    Lognormal {
        mean_ms: f64,
        std_ms: f64,
    },
}

impl CostModel {
    pub fn constant(d: Duration) -> Self {
        CostModel::Constant {
            ms: d.as_secs_f64() * 1e3,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match *self {
            CostModel::Zero => true,
            CostModel::Constant { ms } => ms.is_finite() && ms >= 0.0,
            CostModel::Normal { mean_ms, std_ms } => {
                mean_ms.is_finite() && std_ms.is_finite() && std_ms >= 0.0
            }
            CostModel::Lognormal { mean_ms, std_ms } => {
                mean_ms.is_finite() && mean_ms > 0.0 && std_ms.is_finite() && std_ms >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid cost model {self:?}"))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Duration {
        let ms = match *self {
            CostModel::Zero => 0.0,
            CostModel::Constant { ms } => ms,
            CostModel::Normal { mean_ms, std_ms } => {
                if std_ms == 0.0 {
                    mean_ms
                } else {
                    Normal::new(mean_ms, std_ms).map_or(mean_ms, |d| d.sample(rng))
                }
            }
            CostModel::Lognormal { mean_ms, std_ms } => {
                let sigma2 = (1.0 + (std_ms / mean_ms).powi(2)).ln();
                let mu = mean_ms.ln() - 0.5 * sigma2;
                LogNormal::new(mu, sigma2.sqrt()).map_or(mean_ms, |d| d.sample(rng))
            }
        };
        Duration::from_nanos((ms.max(0.0) * 1e6).round() as u64)
    }
}
