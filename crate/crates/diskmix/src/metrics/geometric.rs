//! The geometric mixing meter: sup over centers of ball averages.
//!
//! A field raster is convolved with the normalized indicator of an ε-disk in
//! the frequency domain; the field is mixed at accuracy κ and radius ε when
//! the sup over all centers of |⨍_{B_ε(x)} ρ| stays below κ‖ρ‖_∞. Centers
//! run over the whole padded plane (the field is zero-extended), matching a
//! definition that quantifies over every point of ℝ².
//!
//! Two convolution tiers: small radii use the fine raster padded to twice
//! its size; radii above 0.9 switch to a 4× box-downsampled raster, which
//! keeps the padded transform at the original size while supporting kernels
//! up to the diameter of the domain.

use super::fft2::{C64, Fft2};
use super::raster::{downsample4, rasterize, Raster};
use super::MetricError;
use crate::flow::FieldSnapshot;
use crate::par;
use std::io;

/// Ball-average field over the padded center grid.
#[derive(Debug, Clone)]
pub struct BallAverageField {
    pub epsilon: f64,
    /// Cells per side of the padded grid.
    pub n: usize,
    pub cell: f64,
    /// Center coordinates run over (−extent, extent) in both axes.
    pub extent: f64,
    /// Row-major averages; index (ix, iy) corresponds to the center at
    /// (−extent + (ix+½)·cell, −extent + (iy+½)·cell).
    pub values: Vec<f64>,
}

impl BallAverageField {
    pub fn sup(&self) -> f64 {
        par::max_abs(&self.values)
    }

    /// Value at the center nearest (x, y).
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let ix = (((x + self.extent) / self.cell - 0.5).round() as i64)
            .clamp(0, self.n as i64 - 1) as usize;
        let iy = (((y + self.extent) / self.cell - 0.5).round() as i64)
            .clamp(0, self.n as i64 - 1) as usize;
        self.values[iy * self.n + ix]
    }

    /// Debug dump: one `x,y,value` row per center, row-major.
    pub fn write_csv<W: io::Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "x,y,value")?;
        for iy in 0..self.n {
            let y = -self.extent + (iy as f64 + 0.5) * self.cell;
            for ix in 0..self.n {
                let x = -self.extent + (ix as f64 + 0.5) * self.cell;
                writeln!(out, "{x:.6e},{y:.6e},{:.12e}", self.values[iy * self.n + ix])?;
            }
        }
        Ok(())
    }
}

/// One convolution tier: a raster embedded in a padded frequency grid.
pub struct ConvTier {
    raster_n: usize,
    pub cell: f64,
    pad: usize,
    fft: Fft2,
    field_fft: Vec<C64>,
}

impl ConvTier {
    pub fn new(raster: &Raster, pad: usize) -> Self {
        assert!(pad >= raster.n);
        let mut field = vec![C64::default(); pad * pad];
        for iy in 0..raster.n {
            for ix in 0..raster.n {
                field[iy * pad + ix] = C64::new(raster.get(ix, iy), 0.0);
            }
        }
        let fft = Fft2::new(pad);
        fft.forward(&mut field);
        Self {
            raster_n: raster.n,
            cell: raster.cell,
            pad,
            fft,
            field_fft: field,
        }
    }

    /// Largest kernel radius (in length units) this tier supports without
    /// wrap-around contamination.
    pub fn max_epsilon(&self) -> f64 {
        ((self.pad - self.raster_n) / 2).saturating_sub(2) as f64 * self.cell
    }

    /// Convolves with the ε-disk kernel and returns the padded average field.
    pub fn ball_field(&self, epsilon: f64) -> Result<BallAverageField, MetricError> {
        let r_cells = epsilon / self.cell;
        if r_cells < 2.0 {
            return Err(MetricError::KernelUnresolved {
                epsilon,
                cell: self.cell,
            });
        }
        if epsilon > self.max_epsilon() {
            return Err(MetricError::KernelTooLarge {
                epsilon,
                max: self.max_epsilon(),
            });
        }
        let p = self.pad;
        let mut kernel = disk_kernel(p, r_cells);
        self.fft.forward(&mut kernel);
        for (k, f) in kernel.iter_mut().zip(&self.field_fft) {
            *k *= *f;
        }
        self.fft.inverse(&mut kernel);
        let scale = 1.0 / (p * p) as f64;
        // the raster is embedded at padded index 0, so the circular
        // convolution leaves index 0 at the raster's lower-left corner; roll
        // by half the padding so index 0 is the lower-left of the symmetric
        // window around the domain, matching the advertised center layout
        let shift = (p - self.raster_n) / 2;
        let values: Vec<f64> = par::map_indexed(p * p, |i| {
            let (iy, ix) = (i / p, i % p);
            let src = ((iy + p - shift) % p) * p + (ix + p - shift) % p;
            kernel[src].re * scale
        });
        let extent = 0.5 * p as f64 * self.cell;
        Ok(BallAverageField {
            epsilon,
            n: p,
            cell: self.cell,
            extent,
            values,
        })
    }

    /// Sup over all centers of |ball average|.
    pub fn ball_sup(&self, epsilon: f64) -> Result<f64, MetricError> {
        Ok(self.ball_field(epsilon)?.sup())
    }
}

/// Wrap-around disk indicator on a p×p grid, normalized to unit sum, with a
/// one-cell antialiasing ramp at the rim (coverage ≈ clipped distance).
fn disk_kernel(p: usize, r_cells: f64) -> Vec<C64> {
    let mut kernel = vec![C64::default(); p * p];
    let reach = r_cells.ceil() as i64 + 1;
    let mut sum = 0.0;
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let d = ((dx * dx + dy * dy) as f64).sqrt();
            let w = (r_cells + 0.5 - d).clamp(0.0, 1.0);
            if w > 0.0 {
                let ix = dx.rem_euclid(p as i64) as usize;
                let iy = dy.rem_euclid(p as i64) as usize;
                kernel[iy * p + ix] = C64::new(w, 0.0);
                sum += w;
            }
        }
    }
    let inv = 1.0 / sum;
    for k in kernel.iter_mut() {
        k.re *= inv;
    }
    kernel
}

/// The ε-ball average field of a snapshot on an n×n raster. Standalone
/// single-ε entry point; sweeps should go through `geometric_scale`, which
/// reuses the field transform across the ε grid.
pub fn ball_average_field(
    snapshot: &FieldSnapshot,
    epsilon: f64,
    grid: usize,
) -> Result<BallAverageField, MetricError> {
    let raster = rasterize(snapshot, grid);
    if epsilon < 2.0 * raster.cell {
        return Err(MetricError::KernelUnresolved {
            epsilon,
            cell: raster.cell,
        });
    }
    let r_cells = (epsilon / raster.cell).ceil() as usize;
    let need = grid + 2 * (r_cells + 2);
    let pad = need.next_power_of_two().max(grid * 2);
    let tier = ConvTier::new(&raster, pad);
    tier.ball_field(epsilon)
}

/// Pass/fail outcome of the ε sweep.
#[derive(Debug, Clone)]
pub struct GeometricScaleResult {
    pub kappa: f64,
    /// Largest tested ε that failed below the bracket point; 0 when every
    /// tested ε passed.
    pub epsilon_lower: f64,
    /// Smallest tested ε whose ball-average sup passed the κ test; +∞ when
    /// none passed (unmixed at every tested radius).
    pub epsilon_upper: f64,
    pub grid_resolution: usize,
    /// Max |coordinate| of scanned centers (padded plane half-width).
    pub center_extent: f64,
    /// Full pass/fail vector over the tested grid: (ε, ball sup, passed).
    pub tested: Vec<(f64, f64, bool)>,
}

/// Geometric ε grid with ratio 2^{1/4} spanning [4·cell, max_epsilon].
pub fn default_epsilon_grid(grid_resolution: usize, max_epsilon: f64) -> Vec<f64> {
    let cell = 2.0 / grid_resolution as f64;
    let mut eps = 4.0 * cell;
    let ratio = 2f64.powf(0.25);
    let mut out = Vec::new();
    while eps <= max_epsilon * (1.0 + 1e-12) {
        out.push(eps);
        eps *= ratio;
    }
    out
}

const COARSE_SWITCH: f64 = 0.9;

/// Sweeps the ε grid against the κ·‖ρ‖_∞ threshold and brackets the smallest
/// mixed radius. All grid points are tested; monotonicity is not assumed.
pub fn geometric_scale(
    snapshot: &FieldSnapshot,
    kappa: f64,
    grid_resolution: usize,
    epsilon_grid: &[f64],
) -> Result<GeometricScaleResult, MetricError> {
    assert!(kappa > 0.0 && kappa < 1.0, "accuracy must lie in (0,1)");
    if epsilon_grid.is_empty() {
        return Err(MetricError::EmptyEpsilonGrid);
    }
    let raster = rasterize(snapshot, grid_resolution);
    let threshold = kappa * snapshot.sup_norm() * (1.0 + 1e-12);
    let fine = ConvTier::new(&raster, 2 * grid_resolution);
    let coarse = if epsilon_grid.iter().any(|&e| e > COARSE_SWITCH) {
        Some(ConvTier::new(&downsample4(&raster), grid_resolution))
    } else {
        None
    };
    let mut tested = Vec::with_capacity(epsilon_grid.len());
    let mut center_extent = 0.0f64;
    for &eps in epsilon_grid {
        let tier = if eps > COARSE_SWITCH {
            coarse.as_ref().expect("coarse tier built for large ε")
        } else {
            &fine
        };
        let sup = tier.ball_sup(eps)?;
        center_extent = center_extent.max(0.5 * tier.pad as f64 * tier.cell);
        tested.push((eps, sup, sup <= threshold));
    }
    let epsilon_upper = tested
        .iter()
        .filter(|(_, _, pass)| *pass)
        .map(|(e, _, _)| *e)
        .fold(f64::INFINITY, f64::min);
    let epsilon_lower = tested
        .iter()
        .filter(|(e, _, pass)| !*pass && *e < epsilon_upper)
        .map(|(e, _, _)| *e)
        .fold(0.0f64, f64::max);
    Ok(GeometricScaleResult {
        kappa,
        epsilon_lower,
        epsilon_upper,
        grid_resolution,
        center_extent,
        tested,
    })
}
