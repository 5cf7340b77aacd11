//! Text formats: chip configuration, Touchstone files and report CSVs.

pub mod config;
pub mod report;
pub mod touchstone;

pub use config::{parse_config, parse_config_for_synth, write_config, ChipConfig, GridSpacing};
pub use report::{metrics_csv, states_csv, write_metrics_csv, write_report_csv, write_states_csv};
pub use touchstone::{parse_touchstone, read_touchstone, touchstone_text, write_touchstone, TouchstoneRow};
