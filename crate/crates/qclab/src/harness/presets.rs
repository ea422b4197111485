//! Shipped preset configs, embedded at compile time.
//!
//! Every supported experiment kind has at least one ready-made config here,
//! so each headline check is reproducible from a name alone. `resolve_config`
//! accepts either a filesystem path or a preset name.

use super::config::Config;
use crate::error::{QcError, Result};
use std::path::Path;

/// (name, config text) for every shipped preset.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "toeplitz_calculus",
        include_str!("../../presets/toeplitz_calculus.cfg"),
    ),
    (
        "husimi_health",
        include_str!("../../presets/husimi_health.cfg"),
    ),
    ("cost_floor", include_str!("../../presets/cost_floor.cfg")),
    (
        "coupling_sandwich",
        include_str!("../../presets/coupling_sandwich.cfg"),
    ),
    (
        "coupling_interval",
        include_str!("../../presets/coupling_interval.cfg"),
    ),
    (
        "classical_health",
        include_str!("../../presets/classical_health.cfg"),
    ),
    (
        "quantum_health",
        include_str!("../../presets/quantum_health.cfg"),
    ),
    (
        "hartree_vlasov",
        include_str!("../../presets/hartree_vlasov.cfg"),
    ),
    ("pairwise", include_str!("../../presets/pairwise.cfg")),
    ("mean_field_2", include_str!("../../presets/mean_field_2.cfg")),
    ("mean_field_3", include_str!("../../presets/mean_field_3.cfg")),
    ("nccs_guard", include_str!("../../presets/nccs_guard.cfg")),
];

/// Names of all shipped presets, in catalog order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Parse the named preset.
pub fn preset(name: &str) -> Result<Config> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Config::parse(text))
        .ok_or_else(|| {
            QcError::InvalidConfig(format!(
                "no preset named {name:?}; known presets: {}",
                preset_names().join(", ")
            ))
        })?
}

/// Load a config from `spec`: an existing file path wins, otherwise the
/// preset catalog is consulted.
pub fn resolve_config(spec: &str) -> Result<Config> {
    let path = Path::new(spec);
    if path.is_file() {
        return Config::load(path);
    }
    preset(spec)
}
