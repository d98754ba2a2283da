//! Batch harness around `procsteer`: walk-off and Werner sweeps, the
//! four-angle table and single-state reports.

pub mod analyze;
pub mod config;
pub mod error;
pub mod output;
pub mod phi_table;
pub mod sweep;

pub use config::{Grid, Scenario, Shots, SweepConfig};
pub use error::CliError;
pub use sweep::{SweepRecord, Track, CSV_HEADER};
