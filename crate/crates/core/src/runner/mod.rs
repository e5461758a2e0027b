//! Command-line orchestration: configs, presets, sweeps and persistence.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

pub use commands::{
    cmd_converge, cmd_fit, cmd_oracle, cmd_period_scan, cmd_scan, cmd_vdw, RunOptions, CONVERGE_COLUMNS, FIT_COLUMNS,
    PERIOD_COLUMNS, SCAN_COLUMNS, VDW_COLUMN, VDW_COLUMNS,
};
pub use config::{ExperimentConfig, ResolvedConfig};
pub use presets::{preset, PRESET_NAMES};
