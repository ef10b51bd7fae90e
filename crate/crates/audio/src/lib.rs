//! Audio pipeline: ambisonic encoding of mono sources, head-tracked
//! soundfield rotation and zoom, and FFT overlap-add binauralization.
//!
//! Fields use ACN channel order and SN3D normalization. Directions follow
//! the body frame convention: x forward, y left, z up.

pub mod binaural;
pub mod block;
pub mod convolve;
pub mod encode;
pub mod error;
pub mod hrtf;
pub mod pipeline;
pub mod rotate;
pub mod sh;
pub mod wav;
pub mod zoom;

pub use binaural::{binauralize, psychoacoustic_filter, Binauralizer, PsychoacousticFilter};
pub use block::{channel_count, normalize, AmbisonicBlock, AudioBlock};
pub use convolve::{Convolver, Route};
pub use encode::{accumulate_source, encode, SourceSpec};
pub use error::AudioError;
pub use hrtf::HrtfSet;
pub use pipeline::{AudioConfig, AudioEncoder, AudioPlayback, PlaybackOutput, BLOCK_DEADLINE};
pub use rotate::{rotate_soundfield, SoundfieldRotation};
pub use sh::{direction, sh_sn3d};
pub use zoom::{zoom_soundfield, Zoomed};
