//! Initial scalar data on the unit disk.
//!
//! Every datum is supported in the closed unit disk and carries its sup norm
//! and a flag recording whether all circle averages centered at the origin
//! vanish. That circle-mean condition decides mixing behavior under the
//! radial shear, so constructors either guarantee it exactly (step-radial,
//! modal) or record its violation (counterexample data).

use crate::geometry::{wrap_angle, TWO_PI};
use crate::special::bessel_j;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for the per-profile zero-mean requirement.
pub const PROFILE_MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DatumError {
    #[error("step profile needs at least one interval")]
    EmptyProfile,
    #[error("profile breakpoints must rise strictly from 0 to 2π")]
    BadBreakpoints,
    #[error("{got} values for {intervals} intervals")]
    ValueCountMismatch { intervals: usize, got: usize },
    #[error("profile {index} has mean {mean:.3e}, above tolerance {tol:.1e}")]
    ProfileMeanNonzero { index: usize, mean: f64, tol: f64 },
    #[error("level {level} needs {expected} profiles, got {got}")]
    ProfileCountMismatch {
        level: u32,
        expected: usize,
        got: usize,
    },
    #[error("accuracy parameter must lie in (0,1), got {0}")]
    BadAccuracy(f64),
    #[error("angular mode 0 violates the zero-circle-mean requirement; use m ≥ 1")]
    ZeroMode,
    #[error("band radii must rise strictly and end at 1")]
    BadBands,
    #[error("sampled grid invalid: {0}")]
    BadGrid(String),
    #[error("non-finite value in datum definition")]
    NonFinite,
    #[error("csv: {0}")]
    Csv(String),
}

// ---------------------------------------------------------------------------
// angular step profiles

/// Piecewise-constant 2π-periodic function of the angle.
///
/// `breakpoints` runs from 0 to 2π inclusive; `values[k]` rules the half-open
/// interval `(breakpoints[k], breakpoints[k+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, DatumError> {
        if values.is_empty() {
            return Err(DatumError::EmptyProfile);
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(DatumError::ValueCountMismatch {
                intervals: breakpoints.len().saturating_sub(1),
                got: values.len(),
            });
        }
        if breakpoints[0] != 0.0 {
            return Err(DatumError::BadBreakpoints);
        }
        let last = *breakpoints.last().unwrap();
        if (last - TWO_PI).abs() > 1e-12 {
            return Err(DatumError::BadBreakpoints);
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DatumError::BadBreakpoints);
        }
        if breakpoints.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(DatumError::NonFinite);
        }
        let mut breakpoints = breakpoints;
        *breakpoints.last_mut().unwrap() = TWO_PI; // snap the closing angle
        Ok(Self { breakpoints, values })
    }

    /// Single interval of constant value.
    pub fn constant(value: f64) -> Self {
        Self::new(vec![0.0, TWO_PI], vec![value]).unwrap()
    }

    /// +1 on (0, π], −1 on (π, 2π].
    pub fn half_disk() -> Self {
        Self::new(vec![0.0, std::f64::consts::PI, TWO_PI], vec![1.0, -1.0]).unwrap()
    }

    /// `periods` full ±1 oscillations: 2·periods equal intervals alternating
    /// +1, −1. Mean-free by construction.
    pub fn square_wave(periods: u32) -> Self {
        assert!(periods >= 1);
        let n = 2 * periods as usize;
        let breakpoints = (0..=n).map(|k| TWO_PI * k as f64 / n as f64).collect();
        let values = (0..n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        Self::new(breakpoints, values).unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interval_count(&self) -> usize {
        self.values.len()
    }

    /// Value at any angle (wrapped internally). The point θ = 0 belongs to
    /// the last interval, matching the half-open-(lo, hi] convention.
    pub fn eval(&self, theta: f64) -> f64 {
        let mut th = wrap_angle(theta);
        if th == 0.0 {
            th = TWO_PI;
        }
        let i = self.breakpoints.partition_point(|&b| b < th);
        // th ∈ (b[i-1], b[i]]
        self.values[i - 1]
    }

    /// ∫₀^{2π} f(θ) dθ.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| v * (w[1] - w[0]))
            .sum()
    }

    /// Mean value over the circle.
    pub fn mean(&self) -> f64 {
        self.integral() / TWO_PI
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_mean_free(&self, tol: f64) -> bool {
        self.integral().abs() <= tol * TWO_PI.max(1.0) * (1.0 + self.max_abs())
    }

    /// Same steps with the mean removed.
    pub fn with_zero_mean(&self) -> Self {
        let m = self.mean();
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v - m).collect(),
        }
    }

    /// The rotated profile θ ↦ f(θ − delta), rebuilt on wrapped breakpoints.
    pub fn rotated(&self, delta: f64) -> Self {
        let mut edges: Vec<f64> = vec![0.0, TWO_PI];
        for &b in &self.breakpoints[..self.breakpoints.len() - 1] {
            let w = wrap_angle(b + delta);
            if w > 1e-14 && w < TWO_PI - 1e-14 {
                edges.push(w);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let values = edges
            .windows(2)
            .map(|w| self.eval(0.5 * (w[0] + w[1]) - delta))
            .collect();
        Self::new(edges, values).unwrap()
    }

    /// Fourier coefficients (a_m, b_m) with f(θ) = Σ a_m cos(mθ) + b_m sin(mθ),
    /// m ≥ 1; exact closed form from the interval sums.
    pub fn fourier_coefficient(&self, m: u32) -> (f64, f64) {
        assert!(m >= 1);
        let mf = m as f64;
        let mut a = 0.0;
        let mut b = 0.0;
        for (v, w) in self.values.iter().zip(self.breakpoints.windows(2)) {
            a += v * ((mf * w[1]).sin() - (mf * w[0]).sin()) / mf;
            b += v * ((mf * w[0]).cos() - (mf * w[1]).cos()) / mf;
        }
        (a / std::f64::consts::PI, b / std::f64::consts::PI)
    }

    /// ∫_{lo}^{hi} f(θ − shift) dθ by exact interval clipping: walks the
    /// profile intervals under the shifted window and sums value·length.
    /// Requires hi − lo ≤ 2π (every tile window satisfies this).
    ///
    /// Deliberately antiderivative-free so it stays an independent route
    /// from the closed-form machinery built on the profile antiderivative.
    pub fn integrate_shifted(&self, lo: f64, hi: f64, shift: f64) -> f64 {
        debug_assert!(hi - lo <= TWO_PI + 1e-9);
        if hi <= lo {
            return 0.0;
        }
        let mut remaining = hi - lo;
        let mut cur = wrap_angle(lo - shift);
        let mut acc = 0.0;
        // interval index holding angles just above `cur`
        let mut idx = self.breakpoints.partition_point(|&b| b <= cur);
        loop {
            if idx >= self.values.len() + 1 {
                // wrapped past 2π
                cur = 0.0;
                idx = 1;
                continue;
            }
            let next = self.breakpoints[idx.max(1)];
            if idx == 0 {
                idx = 1;
                continue;
            }
            let take = (next - cur).min(remaining);
            acc += self.values[idx - 1] * take;
            remaining -= take;
            if remaining <= 1e-300 {
                return acc;
            }
            cur = next;
            idx += 1;
            if cur >= TWO_PI {
                cur = 0.0;
                idx = 1;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// radial profiles and modal data

/// Bounded radial factor g(r) on [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// Σ coeffs[k]·r^k.
    Poly { coeffs: Vec<f64> },
    /// scale·|r − center|^exponent.
    AbsPower {
        center: f64,
        exponent: f64,
        scale: f64,
    },
    /// r·|2(r − center)|^exponent: a Hölder-`exponent` cusp at `center`,
    /// damped at the origin so modal data built on it stay continuous there.
    RampedCusp { center: f64, exponent: f64 },
    /// J_order(frequency·r).
    BesselJ { order: u32, frequency: f64 },
    /// Piecewise-linear interpolation of (radii, values); constant beyond the ends.
    Table { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Poly { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
            }
            RadialProfile::AbsPower {
                center,
                exponent,
                scale,
            } => scale * (r - center).abs().powf(*exponent),
            RadialProfile::RampedCusp { center, exponent } => {
                r * (2.0 * (r - center)).abs().powf(*exponent)
            }
            RadialProfile::BesselJ { order, frequency } => bessel_j(*order, frequency * r),
            RadialProfile::Table { radii, values } => {
                if radii.is_empty() {
                    return 0.0;
                }
                if r <= radii[0] {
                    return values[0];
                }
                if r >= *radii.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = radii.partition_point(|&x| x < r);
                let (r0, r1) = (radii[i - 1], radii[i]);
                let s = (r - r0) / (r1 - r0);
                values[i - 1] * (1.0 - s) + values[i] * s
            }
        }
    }

    fn max_abs_on_disk(&self) -> f64 {
        (0..=4096)
            .map(|k| self.eval(k as f64 / 4096.0).abs())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), DatumError> {
        let ok = match self {
            RadialProfile::Poly { coeffs } => coeffs.iter().all(|c| c.is_finite()),
            RadialProfile::AbsPower {
                center,
                exponent,
                scale,
            } => center.is_finite() && *exponent > 0.0 && scale.is_finite(),
            RadialProfile::RampedCusp { center, exponent } => {
                center.is_finite() && *exponent > 0.0
            }
            RadialProfile::BesselJ { frequency, .. } => frequency.is_finite(),
            RadialProfile::Table { radii, values } => {
                radii.len() == values.len()
                    && radii.windows(2).all(|w| w[1] > w[0])
                    && radii.iter().chain(values.iter()).all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(DatumError::NonFinite)
        }
    }
}

/// One angular harmonic g(r)·cos(mθ + phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub m: u32,
    pub radial: RadialProfile,
    pub phase: f64,
}

// ---------------------------------------------------------------------------
// banded (piecewise-radial) data

/// Angular behavior of one radial band.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularProfile {
    Const(f64),
    Steps(StepProfile),
}

impl AngularProfile {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            AngularProfile::Const(c) => *c,
            AngularProfile::Steps(p) => p.eval(theta),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            AngularProfile::Const(c) => *c,
            AngularProfile::Steps(p) => p.mean(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            AngularProfile::Const(c) => c.abs(),
            AngularProfile::Steps(p) => p.max_abs(),
        }
    }
}

/// Radial band (r_lo, r_hi] with one angular profile; r_lo is the previous
/// band's r_hi (0 for the first band).
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub r_hi: f64,
    pub profile: AngularProfile,
}

// ---------------------------------------------------------------------------
// sampled grids

/// Rectangular polar grid with bilinear interpolation, periodic in θ.
///
/// `values` is row-major over radii then angles; angle nodes are the given
/// sorted values in [0, 2π), wrapped periodically; radius lookups clamp to
/// the end rows (constant extrapolation toward r=0 and r=1).
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    radii: Vec<f64>,
    thetas: Vec<f64>,
    values: Vec<f64>,
}

impl PolarGrid {
    pub fn new(radii: Vec<f64>, thetas: Vec<f64>, values: Vec<f64>) -> Result<Self, DatumError> {
        if radii.len() < 2 || thetas.len() < 4 {
            return Err(DatumError::BadGrid(
                "need at least 2 radii and 4 angles".into(),
            ));
        }
        if values.len() != radii.len() * thetas.len() {
            return Err(DatumError::BadGrid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                radii.len(),
                thetas.len()
            )));
        }
        if radii.windows(2).any(|w| w[1] <= w[0])
            || radii[0] < 0.0
            || *radii.last().unwrap() > 1.0 + 1e-12
        {
            return Err(DatumError::BadGrid(
                "radii must rise strictly within [0, 1]".into(),
            ));
        }
        if thetas.windows(2).any(|w| w[1] <= w[0])
            || thetas[0] < 0.0
            || *thetas.last().unwrap() >= TWO_PI
        {
            return Err(DatumError::BadGrid(
                "angles must rise strictly within [0, 2π)".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DatumError::NonFinite);
        }
        Ok(Self {
            radii,
            thetas,
            values,
        })
    }

    /// Uniform grid from a value function; n_theta angle nodes at 2πk/n_theta.
    pub fn from_fn(
        n_r: usize,
        n_theta: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, DatumError> {
        let radii: Vec<f64> = (0..n_r)
            .map(|i| (i as f64 + 0.5) / n_r as f64)
            .collect();
        let thetas: Vec<f64> = (0..n_theta)
            .map(|k| TWO_PI * k as f64 / n_theta as f64)
            .collect();
        let mut values = Vec::with_capacity(n_r * n_theta);
        for &r in &radii {
            for &th in &thetas {
                values.push(f(r, th));
            }
        }
        Self::new(radii, thetas, values)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn row(&self, i: usize) -> &[f64] {
        let n = self.thetas.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Mean over θ of row i (the nodes are not assumed uniform).
    fn row_mean(&self, i: usize) -> f64 {
        let row = self.row(i);
        let n = self.thetas.len();
        let mut acc = 0.0;
        for k in 0..n {
            let next = if k + 1 == n {
                self.thetas[0] + TWO_PI
            } else {
                self.thetas[k + 1]
            };
            // midpoint value of the periodic linear interpolant
            let v_next = row[(k + 1) % n];
            acc += 0.5 * (row[k] + v_next) * (next - self.thetas[k]);
        }
        acc / TWO_PI
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        let th = wrap_angle(theta);
        let n = self.thetas.len();
        // angular cell, wrapping the last-to-first gap
        let k = self.thetas.partition_point(|&x| x <= th);
        let (k0, k1, t0, t1) = if k == 0 || k == n {
            let t0 = self.thetas[n - 1];
            let t1 = self.thetas[0] + TWO_PI;
            let th = if k == 0 { th + TWO_PI } else { th };
            return self.eval_angular_cell(r, n - 1, 0, t0, t1, th);
        } else {
            (k - 1, k, self.thetas[k - 1], self.thetas[k])
        };
        self.eval_angular_cell(r, k0, k1, t0, t1, th)
    }

    fn eval_angular_cell(&self, r: f64, k0: usize, k1: usize, t0: f64, t1: f64, th: f64) -> f64 {
        let s = ((th - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let interp_row = |i: usize| -> f64 {
            let row = self.row(i);
            row[k0] * (1.0 - s) + row[k1] * s
        };
        let nr = self.radii.len();
        if r <= self.radii[0] {
            return interp_row(0);
        }
        if r >= self.radii[nr - 1] {
            return interp_row(nr - 1);
        }
        let i = self.radii.partition_point(|&x| x < r);
        let (r0, r1) = (self.radii[i - 1], self.radii[i]);
        let u = (r - r0) / (r1 - r0);
        interp_row(i - 1) * (1.0 - u) + interp_row(i) * u
    }
}

// ---------------------------------------------------------------------------
// the datum itself

#[derive(Debug, Clone, PartialEq)]
pub enum DatumKind {
    /// 2^level dyadic annuli, one angular step profile each.
    StepRadial {
        level: u32,
        profiles: Vec<StepProfile>,
    },
    /// Arbitrary radial bands, each constant or step in θ.
    Banded { bands: Vec<Band> },
    /// Σ g_m(r)·cos(mθ + phase), all m ≥ 1.
    Modal { modes: Vec<Mode> },
    /// Sampled polar grid with bilinear interpolation.
    Sampled { grid: PolarGrid },
}

/// An initial datum with cached sup norm and circle-mean metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDatum {
    kind: DatumKind,
    sup_norm: f64,
    circle_mean_free: bool,
}

/// Result of the circle-average scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularMeanCheck {
    pub satisfied: bool,
    /// max over scanned radii of |r·∫₀^{2π} ρ(r,θ) dθ| (the circle integral
    /// against uniform measure on the circle of radius r).
    pub max_violation: f64,
    pub tolerance: f64,
}

impl ScalarDatum {
    fn from_kind(kind: DatumKind, circle_mean_free: bool) -> Self {
        let sup_norm = sup_norm_of(&kind);
        Self {
            kind,
            sup_norm,
            circle_mean_free,
        }
    }

    pub fn kind(&self) -> &DatumKind {
        &self.kind
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn circle_mean_free(&self) -> bool {
        self.circle_mean_free
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm == 0.0
    }

    /// Pointwise value; 0 outside the closed unit disk. The angle is wrapped
    /// internally, so callers may pass raw pulled-back angles.
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        if r > 1.0 || r < 0.0 {
            return 0.0;
        }
        match &self.kind {
            DatumKind::StepRadial { level, profiles } => {
                let idx = annulus_index(r, *level);
                profiles[idx].eval(theta)
            }
            DatumKind::Banded { bands } => {
                let i = bands.partition_point(|b| b.r_hi < r);
                let i = i.min(bands.len() - 1);
                bands[i].profile.eval(theta)
            }
            DatumKind::Modal { modes } => modes
                .iter()
                .map(|md| md.radial.eval(r) * (md.m as f64 * theta + md.phase).cos())
                .sum(),
            DatumKind::Sampled { grid } => grid.eval(r, theta),
        }
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        let p = crate::geometry::PolarPoint::from_xy(x, y);
        self.eval(p.r, p.theta)
    }
}

/// Annulus index at a dyadic level: r ∈ (ℓ·2^{−N}, (ℓ+1)·2^{−N}]; ties fall
/// to the inner annulus; r = 0 belongs to annulus 0.
pub fn annulus_index(r: f64, level: u32) -> usize {
    let scaled = r * (1u64 << level) as f64;
    let idx = (scaled.ceil() as i64 - 1).max(0);
    (idx as usize).min((1usize << level) - 1)
}

fn sup_norm_of(kind: &DatumKind) -> f64 {
    match kind {
        DatumKind::StepRadial { profiles, .. } => {
            profiles.iter().map(|p| p.max_abs()).fold(0.0, f64::max)
        }
        DatumKind::Banded { bands } => bands
            .iter()
            .map(|b| b.profile.max_abs())
            .fold(0.0, f64::max),
        DatumKind::Modal { modes } => {
            if modes.is_empty() {
                return 0.0;
            }
            if modes.len() == 1 {
                // single harmonic: sup over θ at fixed r is |g(r)|
                return modes[0].radial.max_abs_on_disk();
            }
            // dense scan; documented as an estimate for multi-mode data
            let m_max = modes.iter().map(|m| m.m).max().unwrap();
            let n_th = (64 * m_max as usize).clamp(256, 8192);
            let mut sup = 0.0f64;
            for i in 0..=512 {
                let r = i as f64 / 512.0;
                for k in 0..n_th {
                    let th = TWO_PI * k as f64 / n_th as f64;
                    let v: f64 = modes
                        .iter()
                        .map(|md| md.radial.eval(r) * (md.m as f64 * th + md.phase).cos())
                        .sum();
                    sup = sup.max(v.abs());
                }
            }
            sup
        }
        DatumKind::Sampled { grid } => {
            // bilinear interpolation never exceeds its nodes
            grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        }
    }
}

// ---------------------------------------------------------------------------
// constructors

/// Step-radial datum: 2^level annuli with mean-free angular step profiles.
pub fn make_step_radial(level: u32, profiles: Vec<StepProfile>) -> Result<ScalarDatum, DatumError> {
    let expected = 1usize << level;
    if profiles.len() != expected {
        return Err(DatumError::ProfileCountMismatch {
            level,
            expected,
            got: profiles.len(),
        });
    }
    for (index, p) in profiles.iter().enumerate() {
        if !p.is_mean_free(PROFILE_MEAN_TOL) {
            return Err(DatumError::ProfileMeanNonzero {
                index,
                mean: p.mean(),
                tol: PROFILE_MEAN_TOL,
            });
        }
    }
    Ok(ScalarDatum::from_kind(
        DatumKind::StepRadial { level, profiles },
        true,
    ))
}

/// Step-radial datum without the per-profile mean check. Tile averaging
/// produces profiles that inherit whatever circle means the source field
/// had, so the mean-free flag is measured here rather than asserted.
pub(crate) fn step_radial_unchecked(level: u32, profiles: Vec<StepProfile>) -> ScalarDatum {
    assert_eq!(profiles.len(), 1usize << level, "profile count");
    let free = profiles
        .iter()
        .all(|p| p.is_mean_free(PROFILE_MEAN_TOL * (1.0 + p.max_abs())));
    ScalarDatum::from_kind(DatumKind::StepRadial { level, profiles }, free)
}

/// The ±1 half-disk datum (level 0).
pub fn half_disk_datum() -> ScalarDatum {
    make_step_radial(0, vec![StepProfile::half_disk()]).unwrap()
}

/// The zero datum.
pub fn zero_datum() -> ScalarDatum {
    make_step_radial(0, vec![StepProfile::constant(0.0)]).unwrap()
}

/// General banded datum. Bands must rise strictly in r and end at 1.
pub fn banded_datum(bands: Vec<Band>) -> Result<ScalarDatum, DatumError> {
    if bands.is_empty() {
        return Err(DatumError::BadBands);
    }
    let mut prev = 0.0;
    for b in &bands {
        if !(b.r_hi > prev) || !b.r_hi.is_finite() {
            return Err(DatumError::BadBands);
        }
        prev = b.r_hi;
    }
    if (prev - 1.0).abs() > 1e-12 {
        return Err(DatumError::BadBands);
    }
    let mut bands = bands;
    bands.last_mut().unwrap().r_hi = 1.0;
    let free = bands
        .iter()
        .all(|b| b.profile.mean().abs() <= PROFILE_MEAN_TOL * (1.0 + b.profile.max_abs()));
    Ok(ScalarDatum::from_kind(DatumKind::Banded { bands }, free))
}

/// Radial counterexample: −1 on r ≤ 1/√2, +1 outside. Zero global mean but
/// nonzero mean on every circle, so the flow leaves it fixed and unmixed.
pub fn stationary_annulus_datum() -> ScalarDatum {
    banded_datum(vec![
        Band {
            r_hi: std::f64::consts::FRAC_1_SQRT_2,
            profile: AngularProfile::Const(-1.0),
        },
        Band {
            r_hi: 1.0,
            profile: AngularProfile::Const(1.0),
        },
    ])
    .unwrap()
}

/// Accuracy-threshold counterexample: +κ on r ≤ 1/(2√2), −κ on the annulus up
/// to 1/2 (areas balance), and ±1 half profiles outside. The outer part mixes;
/// the inner radial part does not, so ball averages of size below the inner
/// radius stay pinned near κ.
pub fn partial_mixing_datum(kappa: f64) -> Result<ScalarDatum, DatumError> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(DatumError::BadAccuracy(kappa));
    }
    let r1 = 0.25 * std::f64::consts::SQRT_2; // 1/(2√2)
    banded_datum(vec![
        Band {
            r_hi: r1,
            profile: AngularProfile::Const(kappa),
        },
        Band {
            r_hi: 0.5,
            profile: AngularProfile::Const(-kappa),
        },
        Band {
            r_hi: 1.0,
            profile: AngularProfile::Steps(StepProfile::half_disk()),
        },
    ])
}

/// Smooth (or prescribed-regularity) datum Σ g_m(r)cos(mθ + φ_m), m ≥ 1.
/// The empty list is the zero datum.
pub fn modal_datum(modes: Vec<Mode>) -> Result<ScalarDatum, DatumError> {
    if modes.iter().any(|m| m.m == 0) {
        return Err(DatumError::ZeroMode);
    }
    for m in &modes {
        m.radial.validate()?;
        if !m.phase.is_finite() {
            return Err(DatumError::NonFinite);
        }
    }
    Ok(ScalarDatum::from_kind(DatumKind::Modal { modes }, true))
}

/// Sampled datum; the circle-mean flag is measured from the grid rows.
pub fn sampled_datum(grid: PolarGrid) -> Result<ScalarDatum, DatumError> {
    let sup = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + sup);
    let free = (0..grid.radii.len()).all(|i| {
        grid.row_mean(i).abs() * TWO_PI * grid.radii[i] <= tol
    });
    Ok(ScalarDatum::from_kind(DatumKind::Sampled { grid }, free))
}

// ---------------------------------------------------------------------------
// circle-mean checking and projection

impl ScalarDatum {
    /// Scans circle integrals at `radial_samples` radii. For step-like data
    /// the per-circle mean is an exact interval sum; sampled data use their
    /// own angular nodes; modal data vanish identically (`angular_samples`
    /// only guards the API for future kinds).
    pub fn check_zero_circular_mean(
        &self,
        radial_samples: usize,
        angular_samples: usize,
    ) -> CircularMeanCheck {
        assert!(radial_samples >= 16 && angular_samples >= 16);
        let tol = 1e-9 * (1.0 + self.sup_norm);
        let mut max_violation = 0.0f64;
        for k in 0..radial_samples {
            let r = (k as f64 + 0.5) / radial_samples as f64;
            let circ = match &self.kind {
                DatumKind::StepRadial { level, profiles } => {
                    profiles[annulus_index(r, *level)].integral()
                }
                DatumKind::Banded { bands } => {
                    let i = bands.partition_point(|b| b.r_hi < r).min(bands.len() - 1);
                    match &bands[i].profile {
                        AngularProfile::Const(c) => c * TWO_PI,
                        AngularProfile::Steps(p) => p.integral(),
                    }
                }
                DatumKind::Modal { .. } => 0.0,
                DatumKind::Sampled { .. } => {
                    // trapezoidal rule in θ at this radius
                    let n = angular_samples;
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += self.eval(r, TWO_PI * j as f64 / n as f64);
                    }
                    acc * TWO_PI / n as f64
                }
            };
            max_violation = max_violation.max((circ * r).abs());
        }
        CircularMeanCheck {
            satisfied: max_violation <= tol,
            max_violation,
            tolerance: tol,
        }
    }

    /// Subtracts the per-circle average. Analytic kinds are rebuilt exactly;
    /// sampled grids subtract row means. The returned datum is re-checked at
    /// `verify_radii` radii (debug assertion).
    pub fn project_zero_circular_mean(&self, verify_radii: usize) -> ScalarDatum {
        let projected = match &self.kind {
            DatumKind::StepRadial { level, profiles } => ScalarDatum::from_kind(
                DatumKind::StepRadial {
                    level: *level,
                    profiles: profiles.iter().map(|p| p.with_zero_mean()).collect(),
                },
                true,
            ),
            DatumKind::Banded { bands } => ScalarDatum::from_kind(
                DatumKind::Banded {
                    bands: bands
                        .iter()
                        .map(|b| Band {
                            r_hi: b.r_hi,
                            profile: match &b.profile {
                                AngularProfile::Const(_) => AngularProfile::Const(0.0),
                                AngularProfile::Steps(p) => {
                                    AngularProfile::Steps(p.with_zero_mean())
                                }
                            },
                        })
                        .collect(),
                },
                true,
            ),
            DatumKind::Modal { .. } => self.clone(),
            DatumKind::Sampled { grid } => {
                let n = grid.thetas.len();
                let mut values = grid.values.clone();
                for i in 0..grid.radii.len() {
                    let mean = grid.row_mean(i);
                    for v in &mut values[i * n..(i + 1) * n] {
                        *v -= mean;
                    }
                }
                ScalarDatum::from_kind(
                    DatumKind::Sampled {
                        grid: PolarGrid {
                            radii: grid.radii.clone(),
                            thetas: grid.thetas.clone(),
                            values,
                        },
                    },
                    true,
                )
            }
        };
        debug_assert!(
            projected
                .check_zero_circular_mean(verify_radii.max(16), 64)
                .satisfied
        );
        projected
    }
}

// ---------------------------------------------------------------------------
// CSV import/export for sampled data

/// Reads a sampled datum from CSV with header `r,theta,value`, row-major over
/// a rectangular polar grid (consecutive rows share r).
pub fn sampled_from_csv(path: &std::path::Path) -> Result<ScalarDatum, DatumError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| DatumError::Csv(e.to_string()))?;
    {
        let h = rdr.headers().map_err(|e| DatumError::Csv(e.to_string()))?;
        if h.len() < 3 || &h[0] != "r" || &h[1] != "theta" || &h[2] != "value" {
            return Err(DatumError::Csv("expected header r,theta,value".into()));
        }
    }
    let mut triples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DatumError::Csv(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, DatumError> {
            rec.get(i)
                .ok_or_else(|| DatumError::Csv("short row".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| DatumError::Csv(e.to_string()))
        };
        triples.push((parse(0)?, parse(1)?, parse(2)?));
    }
    if triples.is_empty() {
        return Err(DatumError::Csv("no data rows".into()));
    }
    let mut radii: Vec<f64> = Vec::new();
    for (r, _, _) in &triples {
        if radii.last().map_or(true, |last| r > last) {
            radii.push(*r);
        }
    }
    let n_theta = triples.len() / radii.len();
    if n_theta * radii.len() != triples.len() {
        return Err(DatumError::Csv("ragged grid".into()));
    }
    let thetas: Vec<f64> = triples[..n_theta].iter().map(|t| t.1).collect();
    // verify the grid really is rectangular
    for (i, (r, th, _)) in triples.iter().enumerate() {
        if (*r - radii[i / n_theta]).abs() > 1e-12 || (*th - thetas[i % n_theta]).abs() > 1e-12 {
            return Err(DatumError::Csv("grid not rectangular row-major".into()));
        }
    }
    let values = triples.iter().map(|t| t.2).collect();
    sampled_datum(PolarGrid::new(radii, thetas, values)?)
}

/// Writes a sampled datum (or any datum, sampled onto the given grid shape).
pub fn sampled_to_csv(
    datum: &ScalarDatum,
    path: &std::path::Path,
    n_r: usize,
    n_theta: usize,
) -> Result<(), DatumError> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| DatumError::Csv(e.to_string()))?;
    wtr.write_record(["r", "theta", "value"])
        .map_err(|e| DatumError::Csv(e.to_string()))?;
    for i in 0..n_r {
        let r = (i as f64 + 0.5) / n_r as f64;
        for k in 0..n_theta {
            let th = TWO_PI * k as f64 / n_theta as f64;
            wtr.write_record([
                format!("{r:.12e}"),
                format!("{th:.12e}"),
                format!("{:.12e}", datum.eval(r, th)),
            ])
            .map_err(|e| DatumError::Csv(e.to_string()))?;
        }
    }
    wtr.flush().map_err(|e| DatumError::Csv(e.to_string()))
}
