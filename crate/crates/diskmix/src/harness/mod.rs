//! Experiment runner: named configurations, meter sweeps over dyadic time
//! grids, and deterministic report emission (CSV tables plus a gnuplot
//! script).
//!
//! A run takes an [`config::ExperimentConfig`], evaluates the geometric and
//! functional meters plus tile diagnostics at every grid time, fits decay
//! slopes where enough finite rows exist, and writes `report.csv`,
//! `slopes.csv` and `plot.gp` into the configured output directory. Built-in
//! configurations live in [`experiments`].

pub mod config;
pub mod experiments;
pub mod report;

use crate::datum::DatumError;
use crate::metrics::MetricError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("datum construction failed: {0}")]
    Datum(#[from] DatumError),
    #[error("meter evaluation failed: {0}")]
    Metric(#[from] MetricError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("report has no rows")]
    EmptyReport,
}
