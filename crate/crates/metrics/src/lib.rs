//! Quality-of-experience metrics: motion-to-photon latency, per-component
//! frame statistics and CPU shares, SSIM and FLIP image quality, and
//! trajectory alignment with absolute and relative pose error.

pub mod error;
pub mod flip;
pub mod mtp;
pub mod pose;
pub mod report;
pub mod ssim;
pub mod stats;

pub use error::MetricsError;
pub use flip::{flip, flip_map, DEFAULT_PPD};
pub use mtp::{next_vsync, record_mtp, write_mtp_csv, MtpRecord};
pub use pose::{
    align_trajectories, associate, ate, rpe, Alignment, Ate, PosePair, Rpe, Trajectory, DEFAULT_MAX_GAP,
};
pub use report::{QualityReport, Summary};
pub use ssim::{ssim, ssim_gray};
pub use stats::{cpu_attribution, frame_stats, ComponentStats, FrameStats};
