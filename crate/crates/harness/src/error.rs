use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Runtime(#[from] xrsim_core::RuntimeError),
    #[error(transparent)]
    Run(#[from] xrsim_core::RunError),
    #[error(transparent)]
    Metrics(#[from] xrsim_metrics::MetricsError),
    #[error(transparent)]
    Perception(#[from] xrsim_perception::PerceptionError),
    #[error(transparent)]
    Audio(#[from] xrsim_audio::AudioError),
    #[error(transparent)]
    Visual(#[from] xrsim_visual::VisualError),
    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }
}
