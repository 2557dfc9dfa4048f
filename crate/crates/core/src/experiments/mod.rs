//! Configured experiments: JSON configs, the built-in presets, ε-sweeps and
//! CSV output.

pub mod config;
pub mod expr;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{ExperimentConfig, Mode, Prepared};
pub use expr::Expression;
pub use output::{emit_summary, parse_summary, SummaryRow};
pub use presets::{preset, PRESET_NAMES};
pub use runner::{run_config, run_experiment, run_preset, sweep, RunReport, SweepEntry};
