//! Shipped experiment presets.

use super::{ConfigError, ExperimentConfig};

pub const PRESET_NAMES: [&str; 4] = ["fig2-hybrid", "fig2-direct", "fig3-t2sweep", "fig4-radial"];

pub fn preset_text(name: &str) -> Result<&'static str, ConfigError> {
    Ok(match name {
        "fig2-hybrid" => include_str!("../../presets/fig2-hybrid.toml"),
        "fig2-direct" => include_str!("../../presets/fig2-direct.toml"),
        "fig3-t2sweep" => include_str!("../../presets/fig3-t2sweep.toml"),
        "fig4-radial" => include_str!("../../presets/fig4-radial.toml"),
        _ => return Err(ConfigError::UnknownPreset(name.to_string(), PRESET_NAMES.join(", "))),
    })
}

pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::from_toml(preset_text(name)?)
}
