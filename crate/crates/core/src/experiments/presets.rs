//! The three built-in experiments, shipped as JSON under `presets/`.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 3] = ["test1", "test2", "test3"];

/// Raw JSON text of a preset.
pub fn preset_json(name: &str) -> Result<&'static str> {
    match name {
        "test1" => Ok(include_str!("../../presets/test1.json")),
        "test2" => Ok(include_str!("../../presets/test2.json")),
        "test3" => Ok(include_str!("../../presets/test3.json")),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(preset_json(name)?)
}
