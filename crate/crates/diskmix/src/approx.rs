//! Tile-average approximation of a datum and Hölder/Sobolev diagnostics.
//!
//! Averaging a datum over every tile of 𝒬_N yields a step-radial datum
//! (each annulus carries one constant per sector), the canonical way to
//! feed arbitrary data to the step closed forms. The approximation error
//! decays like 2^{−Nα} in both L¹ and L∞ for α-Hölder data, which the
//! rate experiments measure.

use crate::datum::{step_radial_unchecked, ScalarDatum, StepProfile};
use crate::flow::FieldSnapshot;
use crate::geometry::{PolarPoint, TWO_PI};
use crate::par;
use crate::quadrature;
use crate::tiling::{build_tiling, tile_averages, AnnularTile};

/// Replaces the datum by its average on every tile of 𝒬_N. The result is
/// step-radial at level N with i+1 equal sectors on annulus i; a datum with
/// zero circular means keeps them (each output profile's mean is the
/// annulus average of the input).
pub fn radial_approximation(datum: &ScalarDatum, level: u32) -> ScalarDatum {
    let snapshot = FieldSnapshot::new(datum, 0.0);
    if level == 0 {
        // single cell: the whole disk
        let averages = tile_averages(&snapshot, 1, 8);
        let tiles = build_tiling(1).unwrap();
        let mass: f64 = tiles
            .iter()
            .zip(&averages)
            .map(|(q, &v)| v * q.area())
            .sum();
        let value = mass / std::f64::consts::PI;
        return step_radial_unchecked(0, vec![StepProfile::constant(value)]);
    }
    let tiles = build_tiling(level).unwrap();
    let averages = tile_averages(&snapshot, level, 8);
    let mut profiles = Vec::with_capacity(1 << level);
    let mut cursor = 0usize;
    for i in 0..(1u32 << level) {
        let sectors = (i + 1) as usize;
        let values = averages[cursor..cursor + sectors].to_vec();
        debug_assert!(tiles[cursor].i == i && tiles[cursor].j == 0);
        cursor += sectors;
        let breakpoints: Vec<f64> = (0..=sectors)
            .map(|j| TWO_PI * j as f64 / sectors as f64)
            .collect();
        profiles.push(StepProfile::new(breakpoints, values).expect("valid sector profile"));
    }
    step_radial_unchecked(level, profiles)
}

/// L¹ and L∞ distances between a datum and its level-N tile approximation.
#[derive(Debug, Clone, Copy)]
pub struct ApproximationError {
    pub level: u32,
    pub l1: f64,
    pub sup: f64,
}

const ERR_PANELS: usize = 3;
const ERR_ORDER: usize = 5;
const SUP_SAMPLES: usize = 8;

/// Measures ‖ρ₀ − ρ₀^N‖ in L¹ (per-tile quadrature) and L∞ (dense grid
/// sampling); ρ₀^N is recomputed internally.
pub fn approximation_error(datum: &ScalarDatum, level: u32) -> ApproximationError {
    let approx = radial_approximation(datum, level);
    let tiles = build_tiling(level.max(1)).unwrap();
    let approx_snapshot = FieldSnapshot::new(&approx, 0.0);
    let per_tile: Vec<(f64, f64)> = par::map_indexed(tiles.len(), |k| {
        let q = &tiles[k];
        let mid = q.centroid();
        let c = approx_snapshot.eval(mid.r, mid.theta);
        (tile_l1_deviation(datum, q, c), tile_sup_deviation(datum, q, c))
    });
    let l1 = per_tile.iter().map(|p| p.0).sum();
    let sup = per_tile.iter().map(|p| p.1).fold(0.0, f64::max);
    ApproximationError { level, l1, sup }
}

fn tile_l1_deviation(datum: &ScalarDatum, q: &AnnularTile, c: f64) -> f64 {
    let rule = quadrature::rule(ERR_ORDER);
    let dr = (q.r_hi - q.r_lo) / ERR_PANELS as f64;
    let dth = (q.theta_hi - q.theta_lo) / ERR_PANELS as f64;
    let mut acc = 0.0;
    for a in 0..ERR_PANELS {
        let r0 = q.r_lo + a as f64 * dr;
        for (rw, rx) in rule.mapped(r0, r0 + dr) {
            for b in 0..ERR_PANELS {
                let t0 = q.theta_lo + b as f64 * dth;
                for (tw, tx) in rule.mapped(t0, t0 + dth) {
                    acc += rw * tw * rx * (datum.eval(rx, tx) - c).abs();
                }
            }
        }
    }
    acc
}

fn tile_sup_deviation(datum: &ScalarDatum, q: &AnnularTile, c: f64) -> f64 {
    let mut sup = 0.0f64;
    for a in 0..SUP_SAMPLES {
        let r = q.r_lo + (q.r_hi - q.r_lo) * (a as f64 + 0.5) / SUP_SAMPLES as f64;
        for b in 0..SUP_SAMPLES {
            let th =
                q.theta_lo + (q.theta_hi - q.theta_lo) * (b as f64 + 0.5) / SUP_SAMPLES as f64;
            sup = sup.max((datum.eval(r, th) - c).abs());
        }
    }
    sup
}

/// Regularity diagnostic attached to a datum.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub alpha: f64,
    pub seminorm_estimate: f64,
    /// Human-readable quadrature descriptor.
    pub method: String,
}

/// Gagliardo seminorm estimate ∬ |ρ₀(x)−ρ₀(y)| / |x−y|^{2+α} dx dy by the
/// midpoint rule on a polar product grid; pairs of coincident cells are
/// skipped (their mass vanishes with resolution). `resolution` is the
/// radial cell count; the angular count is twice that. Jump data leave
/// Ẇ^{α,1} as α → 1, so this is a diagnostic, not a certified norm; α ≥ 1
/// only logs a warning.
pub fn w_alpha_1_seminorm(datum: &ScalarDatum, alpha: f64, resolution: usize) -> f64 {
    assert!(alpha > 0.0, "exponent must be positive");
    assert!(resolution >= 4, "resolution too low");
    if alpha >= 1.0 {
        log::warn!(
            "Gagliardo seminorm at alpha = {alpha} ≥ 1: jump data diverge; prefer the gradient L¹ norm"
        );
    }
    let n_r = resolution;
    let n_th = 2 * resolution;
    let dr = 1.0 / n_r as f64;
    let dth = TWO_PI / n_th as f64;
    // cell centers, weights, values
    let count = n_r * n_th;
    let mut pts = Vec::with_capacity(count);
    for a in 0..n_r {
        let r = (a as f64 + 0.5) * dr;
        for b in 0..n_th {
            let th = (b as f64 + 0.5) * dth;
            let xy = PolarPoint::new(r, th).to_xy();
            pts.push((xy.x, xy.y, r * dr * dth, datum.eval(r, th)));
        }
    }
    let power = 0.5 * (2.0 + alpha); // applied to the squared distance
    let rows = par::map_indexed(count, |i| {
        let (xi, yi, wi, vi) = pts[i];
        let mut acc = 0.0;
        for (j, &(xj, yj, wj, vj)) in pts.iter().enumerate() {
            if j == i {
                continue;
            }
            let d2 = (xi - xj) * (xi - xj) + (yi - yj) * (yi - yj);
            acc += (vi - vj).abs() / d2.powf(power) * wj;
        }
        acc * wi
    });
    rows.iter().sum()
}

/// Convenience wrapper recording the estimate together with its method.
pub fn regularity_report(datum: &ScalarDatum, alpha: f64, resolution: usize) -> RegularityReport {
    let seminorm_estimate = w_alpha_1_seminorm(datum, alpha, resolution);
    RegularityReport {
        alpha,
        seminorm_estimate,
        method: format!(
            "midpoint polar {}x{}, diagonal skipped",
            resolution,
            2 * resolution
        ),
    }
}

/// The α-Hölder modal datum of the rate experiments: one m=1 mode whose
/// radial profile r·|2(r−½)|^α is Hölder-α at the ring r=½ and vanishes at
/// the origin fast enough to keep the full field Hölder there too.
pub fn holder_modal_datum(alpha: f64) -> ScalarDatum {
    crate::datum::modal_datum(vec![crate::datum::Mode {
        m: 1,
        radial: crate::datum::RadialProfile::RampedCusp {
            center: 0.5,
            exponent: alpha,
        },
        phase: 0.0,
    }])
    .expect("single m=1 mode is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::{half_disk_datum, modal_datum, zero_datum, Mode, RadialProfile};

    #[test]
    fn zero_datum_maps_to_zero() {
        let a = radial_approximation(&zero_datum(), 3);
        assert_eq!(a.sup_norm(), 0.0);
    }

    #[test]
    fn approximation_is_idempotent() {
        let d = holder_modal_datum(1.0);
        let once = radial_approximation(&d, 3);
        let twice = radial_approximation(&once, 3);
        // both are step-radial level 3; compare pointwise on a probe grid
        for a in 0..24 {
            let r = (a as f64 + 0.5) / 24.0;
            for b in 0..24 {
                let th = TWO_PI * (b as f64 + 0.5) / 24.0;
                let u = once.eval(r, th);
                let v = twice.eval(r, th);
                assert!((u - v).abs() < 1e-10, "({r},{th}): {u} vs {v}");
            }
        }
    }

    #[test]
    fn approximation_preserves_circle_means() {
        let d = holder_modal_datum(0.5);
        assert!(d.circle_mean_free());
        let a = radial_approximation(&d, 4);
        assert!(a.circle_mean_free());
    }

    #[test]
    fn linear_mode_error_halves_per_level() {
        // g(r) = r·|2(r−½)|: Lipschitz datum, so the L¹ error decays ~2^{−N}
        let d = holder_modal_datum(1.0);
        let e3 = approximation_error(&d, 3);
        let e4 = approximation_error(&d, 4);
        let ratio = e3.l1 / e4.l1;
        assert!(
            (1.5..=2.6).contains(&ratio),
            "expected roughly dyadic decay, got {} / {} = {ratio}",
            e3.l1,
            e4.l1
        );
        assert!(e3.sup > e4.sup);
    }

    #[test]
    fn error_is_nonincreasing_in_level() {
        let d = half_disk_datum();
        let mut prev = f64::INFINITY;
        for level in 1..=4 {
            let e = approximation_error(&d, level);
            assert!(e.l1 <= prev * (1.0 + 1e-9), "level {level}: {} > {prev}", e.l1);
            prev = e.l1;
        }
    }

    #[test]
    fn seminorm_zero_for_constant_data() {
        let d = zero_datum();
        assert_eq!(w_alpha_1_seminorm(&d, 0.5, 8), 0.0);
    }

    #[test]
    fn seminorm_two_resolution_agreement() {
        let d = half_disk_datum();
        let a = w_alpha_1_seminorm(&d, 0.5, 24);
        let b = w_alpha_1_seminorm(&d, 0.5, 36);
        let rel = (a - b).abs() / b;
        assert!(rel < 0.05, "{a} vs {b} (rel {rel:.3})");
        assert!(b > 0.0);
    }

    #[test]
    fn smooth_modal_seminorm_converges() {
        let d = modal_datum(vec![Mode {
            m: 1,
            radial: RadialProfile::Poly {
                coeffs: vec![0.0, 1.0],
            },
            phase: 0.0,
        }])
        .unwrap();
        let a = w_alpha_1_seminorm(&d, 0.5, 20);
        let b = w_alpha_1_seminorm(&d, 0.5, 30);
        assert!((a - b).abs() / b < 0.05, "{a} vs {b}");
    }
}
