//! Spatial vibrotactile rendering for body-worn actuator arrays.
//!
//! A virtual vibration source placed anywhere around the wearer is rendered
//! by distributing its perceived intensity across the actuators according to
//! direction and distance from the array's perceived origin, then driving
//! each actuator with an amplitude-modulated carrier.
//!
//! The crate is organised bottom-up:
//!
//! - [`localization`]: distribution ratios, attenuation, channel intensities
//! - [`signal`]: perceived-intensity analysis and carrier synthesis
//! - [`render`]: offline trajectory rendering and the block engine
//! - [`realtime`]: the paced render loop and its queues
//! - [`io`]: WAV, trajectory CSV, layout and config documents
//! - [`protocol`] and [`service`]: the WebSocket control plane

pub mod error;
pub mod geometry;
pub mod io;
pub mod localization;
pub mod protocol;
pub mod realtime;
pub mod render;
pub mod service;
pub mod signal;

pub use error::{Error, Result, WavError};
pub use geometry::Vec3;
pub use localization::{attenuation, ActuatorLayout, DistributionWeights, PanningParams, VirtualSource};
pub use render::{Engine, MultichannelBuffer, RenderConfig, SourceSignal, Trajectory};
pub use signal::{IntensityEnvelope, Preset, SignalConfig, Waveform};

/// Directory holding the shipped layout, trajectory and config files.
pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}
