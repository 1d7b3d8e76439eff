//! Experiment configuration: datum recipes, time grids, resolutions.
//!
//! Configurations are plain JSON so runs are diffable and reproducible. A
//! config owns everything a run needs; two runs with identical configs
//! produce byte-identical reports.

use super::HarnessError;
use crate::approx::holder_modal_datum;
use crate::datum::{self, DatumError, Mode, ScalarDatum, StepProfile};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Recipe for the initial scalar field of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumSpec {
    /// +1 on the upper half disk, −1 on the lower.
    HalfDisk,
    /// 2^level dyadic annuli whose square waves alternate between one and
    /// two angular periods, so refining the level changes the field.
    AlternatingWaves { level: u32 },
    /// Finite list of separated angular modes.
    Modal { modes: Vec<Mode> },
    /// Flow-invariant ±1 split at the equal-area radius.
    StationaryAnnulus,
    /// Interior premixed to amplitude kappa, ±1 half annuli outside r = 1/2.
    PartialMixing { kappa: f64 },
    /// Single-mode datum whose radial profile has a Hölder-alpha cusp.
    HolderCusp { alpha: f64 },
    /// Sampled polar grid loaded from CSV (r,theta,value rows).
    SampledCsv { path: PathBuf },
}

impl DatumSpec {
    pub fn build(&self) -> Result<ScalarDatum, DatumError> {
        match self {
            DatumSpec::HalfDisk => Ok(datum::half_disk_datum()),
            DatumSpec::AlternatingWaves { level } => {
                let profiles = (0..(1u32 << level))
                    .map(|l| StepProfile::square_wave(1 + (l % 2)))
                    .collect();
                datum::make_step_radial(*level, profiles)
            }
            DatumSpec::Modal { modes } => datum::modal_datum(modes.clone()),
            DatumSpec::StationaryAnnulus => Ok(datum::stationary_annulus_datum()),
            DatumSpec::PartialMixing { kappa } => datum::partial_mixing_datum(*kappa),
            DatumSpec::HolderCusp { alpha } => Ok(holder_modal_datum(*alpha)),
            DatumSpec::SampledCsv { path } => datum::sampled_from_csv(path),
        }
    }
}

/// Dyadic time grid: t_min · 2^k for 0 ≤ k < points. Slope fits need decade
/// coverage, and ratio 2 gives it at modest cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| self.t_min * 2f64.powi(k as i32))
            .collect()
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.t_min > 0.0) || !self.t_min.is_finite() {
            return Err(format!("t_min must be positive and finite, got {}", self.t_min));
        }
        if self.points == 0 {
            return Err("time grid needs at least one point".into());
        }
        let reach = self.t_min * 2f64.powi(self.points as i32 - 1);
        if (reach - self.t_max).abs() > 1e-9 * self.t_max.abs().max(1.0) {
            return Err(format!(
                "time grid must double from t_min: {} over {} points reaches {}, t_max says {}",
                self.t_min, self.points, reach, self.t_max
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub datum: DatumSpec,
    /// Accuracies for the geometric meter, strictly ascending, each in (0,1).
    pub kappas: Vec<f64>,
    pub time_grid: TimeGrid,
    /// Cartesian raster side for ball averages; power of two ≥ 64.
    pub raster_resolution: usize,
    /// Base radial node count for the negative-norm solve; power of two ≥ 64.
    pub radial_resolution: usize,
    /// Angular mode budget for the negative-norm solve; power of two ≥ 32.
    pub mode_count: usize,
    /// Largest ball radius the geometric sweep tests. Keep it below the
    /// scale of any deliberately unmixable structure: a ball much wider than
    /// the support passes by dilution alone, which is not mixing.
    pub max_epsilon: f64,
    pub output_dir: PathBuf,
    /// Recorded for reproducibility; built-in runs are fully deterministic.
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.experiment_id.is_empty() {
            return fail("experiment_id must be nonempty".into());
        }
        if let Err(msg) = self.time_grid.validate() {
            return fail(msg);
        }
        if self.kappas.is_empty() {
            return fail("kappa list must be nonempty".into());
        }
        for &k in &self.kappas {
            if !(k > 0.0 && k < 1.0) {
                return fail(format!("accuracy {k} outside (0,1)"));
            }
        }
        for pair in self.kappas.windows(2) {
            if pair[1] <= pair[0] {
                return fail(format!(
                    "kappa list must be strictly ascending, got {} then {}",
                    pair[0], pair[1]
                ));
            }
        }
        if !self.raster_resolution.is_power_of_two() || self.raster_resolution < 64 {
            return fail(format!(
                "raster_resolution must be a power of two ≥ 64, got {}",
                self.raster_resolution
            ));
        }
        if !self.radial_resolution.is_power_of_two() || self.radial_resolution < 64 {
            return fail(format!(
                "radial_resolution must be a power of two ≥ 64, got {}",
                self.radial_resolution
            ));
        }
        if !self.mode_count.is_power_of_two() || self.mode_count < 32 {
            return fail(format!(
                "mode_count must be a power of two ≥ 32, got {}",
                self.mode_count
            ));
        }
        let min_eps = 8.0 / self.raster_resolution as f64;
        if !(self.max_epsilon >= min_eps && self.max_epsilon <= 2.5) {
            return fail(format!(
                "max_epsilon must lie in [{min_eps}, 2.5], got {}",
                self.max_epsilon
            ));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
