//! File formats: multichannel WAV, trajectory CSV, layout and config JSON.

mod config;
mod csv;
mod layout;
mod wav;

use std::path::Path;

pub use config::{load_config, ConfigDocument};
pub use csv::{parse_trajectory_csv, write_trajectory_csv};
pub use layout::{layout_to_json, parse_layout, LayoutDocument};
pub use wav::{read_wav, write_wav, SampleFormat, WavSpec};

use crate::error::{Error, Result};
use crate::localization::ActuatorLayout;
use crate::render::Trajectory;

/// Reads a text file, tagging any error with its path.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(e).in_file(path))
}

pub fn load_layout_file(path: &Path) -> Result<ActuatorLayout> {
    parse_layout(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn load_trajectory_file(path: &Path) -> Result<Trajectory> {
    parse_trajectory_csv(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn load_config_file(path: &Path) -> Result<ConfigDocument> {
    load_config(&read_text(path)?).map_err(|e| e.in_file(path))
}
