//! Runtime core for the XR pipeline simulator.
//!
//! Components (plugins) communicate over typed [`Topic`]s held by a
//! [`Switchboard`]. Each topic has a single writer and any number of readers,
//! which either see every value in order ([`SyncReader`]) or sample the most
//! recent one ([`Topic::read_latest`]). The [`Runtime`] schedules periodic
//! plugins on fixed slots and triggered plugins once per input event, under
//! either a simulated (discrete-event) or a wall clock.

pub mod cost;
pub mod error;
pub mod geometry;
pub mod image;
pub mod par;
pub mod plugin;
pub mod scheduler;
pub mod switchboard;
pub mod time;
pub mod trace;

pub use nalgebra;

pub use cost::CostModel;
pub use error::{PluginError, RunError, RuntimeError};
pub use geometry::Pose;
pub use plugin::{InvocationContext, Plugin, PluginDescriptor, ReadMode, Schedule};
pub use scheduler::Runtime;
pub use switchboard::{Event, OverflowPolicy, Switchboard, SyncReader, Topic, Writer, WriterId};
pub use time::{period_from_hz, Clock, ClockMode, Timestamp};
pub use trace::InvocationRecord;
