//! Mixing meters and inequality checkers.
//!
//! Two primary meters quantify how mixed a transported field is: the
//! geometric scale (smallest ball radius at which all local averages fall
//! below an accuracy threshold) and the functional scale (the negative
//! Sobolev norm computed by a Neumann solve). The inequality suite measures
//! the empirical constants linking tile averages, ball averages, and the
//! functional norm.

pub mod fft2;
pub mod functional;
pub mod geometric;
pub mod inequalities;
pub mod pairing;
pub mod raster;
pub mod rates;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("ball radius {epsilon} under-resolved by cell {cell} (needs ≥ 2 cells)")]
    KernelUnresolved { epsilon: f64, cell: f64 },
    #[error("ball radius {epsilon} exceeds tier capacity {max}")]
    KernelTooLarge { epsilon: f64, max: f64 },
    #[error("ε grid is empty")]
    EmptyEpsilonGrid,
    #[error("radial resolution {given} below minimum {minimum}")]
    ResolutionTooLow { given: usize, minimum: usize },
    #[error("mode count {given} below minimum {minimum}")]
    ModeCountTooLow { given: usize, minimum: usize },
    #[error(
        "global mean {mean:.3e} is not zero: the homogeneous negative-norm solve \
         requires mean-free data (the flow preserves the mean, so a nonzero mean \
         never mixes away); project the datum or use the inhomogeneous norm"
    )]
    GlobalMeanNonzero { mean: f64 },
    #[error("decay fit needs ≥ {minimum} points, got {given}")]
    TooFewPoints { given: usize, minimum: usize },
    #[error("decay fit needs positive values, found {0}")]
    NonpositiveValue(f64),
    #[error("decay fit needs strictly increasing times")]
    TimesNotIncreasing,
}
