//! Visual pipeline: a deterministic software renderer standing in for the
//! application, constant-acceleration pose prediction, rotation-only
//! reprojection, per-channel radial distortion meshes and Weighted
//! Gerchberg-Saxton phase holograms.

pub mod camera;
pub mod distortion;
pub mod error;
pub mod hologram;
pub mod predict;
pub mod render;
pub mod reproject;

pub use camera::CameraModel;
pub use distortion::{
    apply_distortion, build_distortion_mesh, build_inverse_mesh, ChannelCoeffs, DistortionMesh,
    RadialCoeffs,
};
pub use error::VisualError;
pub use hologram::{gsw_hologram, write_phase_mask, DepthPoint, GswResult, HologramProblem};
pub use predict::{predict_pose, Prediction, HISTORY_WINDOW};
pub use render::{render_app, RenderedFrame, Scene};
pub use reproject::{reproject, reprojection_homography};
