//! Experiment harness: configs, runners, artifacts, and health checks.
//!
//! The harness turns a key=value config into a reproducible run directory.
//! [`config::Config`] parses and canonicalizes configs and hashes their
//! content; [`runner::execute`] dispatches on the experiment kind, runs the
//! numerics, and writes every artifact (bound tables, series, checkpoints,
//! phase densities, transport plans) through an [`artifacts::ArtifactSink`]
//! that records a sha256 manifest; [`runner::sweep`] repeats a run along one
//! axis and fits convergence slopes; [`runner::report`] combines run
//! summaries into a single pass/fail table. [`checks`] holds the
//! self-contained calculus and flow health checks the runner dispatches to,
//! and [`presets`] ships ready-made configs for every supported kind.

pub mod artifacts;
pub mod checks;
pub mod config;
pub mod presets;
pub mod runner;

pub use artifacts::ArtifactSink;
pub use checks::Metrics;
pub use config::Config;
pub use presets::{preset, preset_names, resolve_config};
pub use runner::{execute, report, sweep, RunOutcome, SweepOutcome};

/// One named check with its measured value, its limit, and the verdict.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Check that passes when `value <= limit`.
    pub fn le(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    /// Check that passes when `value >= limit`.
    pub fn ge(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            pass: value >= limit,
        }
    }
}
