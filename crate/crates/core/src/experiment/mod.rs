//! Ratio sweep over N: configuration, parameter search, growth fit and reports.

pub mod config;
pub mod fit;
pub mod report;
pub mod sweep;
pub mod verify;

pub use config::ExperimentConfig;
pub use fit::{linear_fit, log_fit, LogFit};
pub use report::{csv_string, to_csv, to_json, write_report};
pub use sweep::{
    difference_directions, family_for, ratio_sweep, search_c, IncidenceSummary, RatioReport, RatioRow,
    SearchTrial,
};
