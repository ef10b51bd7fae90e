use std::time::Duration;

use thiserror::Error;

use crate::trace::InvocationRecord;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("topic `{0}` already exists")]
    DuplicateTopic(String),
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("topic `{topic}` carries `{actual}`, not `{requested}`")]
    PayloadKind {
        topic: String,
        actual: &'static str,
        requested: &'static str,
    },
    #[error("topic `{topic}` is already written by `{owner}`; `{requester}` cannot also write it")]
    WriterConflict {
        topic: String,
        owner: String,
        requester: String,
    },
    #[error("publisher is not the registered writer of topic `{0}`")]
    NotWriter(String),
    #[error("timestamp regression on `{topic}`: {ts_ns} ns after {last_ns} ns")]
    Ordering {
        topic: String,
        last_ns: u64,
        ts_ns: u64,
    },
    #[error("sync reader queue on `{topic}` is full ({capacity} entries)")]
    QueueOverflow { topic: String, capacity: usize },
    #[error("plugin `{0}` is already registered")]
    DuplicatePlugin(String),
    #[error("invalid plugin `{plugin}`: {reason}")]
    InvalidPlugin { plugin: String, reason: String },
    #[error("synchronous dependency cycle through plugins: {0:?}")]
    SyncCycle(Vec<String>),
    #[error("plugin `{plugin}` failed: {source}")]
    Plugin {
        plugin: String,
        #[source]
        source: PluginError,
    },
    #[error("clock error: {0}")]
    Clock(String),
    #[error("trace i/o: {0}")]
    Trace(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Error raised from inside a plugin body.
#[derive(Debug, Error)]
#[error("{message}")]
pub struct PluginError {
    message: String,
}

impl PluginError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

impl From<RuntimeError> for PluginError {
    fn from(err: RuntimeError) -> Self {
        Self::new(err.to_string())
    }
}

/// A failed run, carrying whatever trace was recorded before the failure.
#[derive(Debug, Error)]
#[error("run aborted after {elapsed:?}: {error}")]
pub struct RunError {
    #[source]
    pub error: RuntimeError,
    pub partial: Vec<InvocationRecord>,
    pub elapsed: Duration,
}
