//! Session harness: configuration, pipeline wiring, session execution,
//! replay of recorded sessions and reports.

pub mod config;
pub mod error;
pub mod report;
pub mod session;
pub mod wiring;

pub use config::{AudioSettings, QualityConfig, SessionConfig, SourceConfig};
pub use error::HarnessError;
pub use report::{AudioSummary, ImageSummary, MtpSummary, SessionReport};
pub use session::{analyze, load_report, mtp_records, rate_targets, replay, run_session};
pub use wiring::{wire_pipelines, DisplayFrame, RenderSubmission, Sinks, Wired, PLUGIN_NAMES, TOPIC_NAMES};
