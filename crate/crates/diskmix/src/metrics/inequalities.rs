//! Numerical checks of the tiling inequalities.
//!
//! Three statements connect tile averages to the mixing meters:
//!
//! * a tile Poincaré inequality ‖ξ − ξ_Q‖_{L¹(Q)} ≤ C·2^{−M}‖∇ξ‖_{L¹(Q)},
//!   uniform over the tiling level;
//! * small tile averages (≤ κ/2·sup) at level M force the geometric scale
//!   below 8c·2^{−M}/κ, with c the tile-diameter constant;
//! * small tile averages (≤ 2·sup·2^{−M}) force the negative norm below
//!   C·sup·2^{−M}.
//!
//! None of the absolute constants is asserted; each checker reports the
//! measured ratio so a sweep can test boundedness.

use super::geometric::ball_average_field;
use super::functional::h_minus_one_norm;
use super::MetricError;
use crate::flow::FieldSnapshot;
use crate::geometry::PolarPoint;
use crate::par;
use crate::quadrature;
use crate::testfns::TestFunction;
use crate::tiling::{build_tiling, max_abs_tile_average, tile_diameter_constant, AnnularTile};

/// Quadrature panels per tile edge for the Poincaré integrals; the
/// integrand |ξ − ξ_Q| has a kink, so panels matter more than order.
const POINCARE_PANELS: usize = 4;
const POINCARE_ORDER: usize = 5;

/// Max over tiles of ‖ξ − ξ_Q‖_{L¹(Q)} / (2^{−M} ‖∇ξ‖_{L¹(Q)}).
///
/// Tiles where the gradient integral is numerically zero are excluded
/// (constant ξ would make every denominator degenerate; the ratio is then
/// 0 by convention).
pub fn poincare_ratio(xi: &TestFunction, level: u32) -> f64 {
    let tiles = build_tiling(level).expect("tiling level must be ≥ 1");
    let h = 0.5f64.powi(level as i32);
    let ratios: Vec<f64> = par::map_indexed(tiles.len(), |k| {
        let q = tiles[k];
        let pts = tile_quadrature_points(&q);
        let area: f64 = pts.iter().map(|(w, _)| w).sum();
        let vals: Vec<(f64, f64, f64)> = pts
            .iter()
            .map(|&(w, p)| (w, xi.eval(p), xi.gradient(p).norm()))
            .collect();
        let mean = vals.iter().map(|(w, v, _)| w * v).sum::<f64>() / area;
        let num: f64 = vals.iter().map(|(w, v, _)| w * (v - mean).abs()).sum();
        let den: f64 = vals.iter().map(|(w, _, g)| w * g).sum();
        let scale = area * (1.0 + mean.abs());
        if den <= 1e-13 * scale {
            0.0
        } else {
            num / (h * den)
        }
    });
    ratios.into_iter().fold(0.0, f64::max)
}

/// Quadrature nodes (weight incl. the r factor, point) covering one tile.
fn tile_quadrature_points(q: &AnnularTile) -> Vec<(f64, PolarPoint)> {
    let rule = quadrature::rule(POINCARE_ORDER);
    let mut pts = Vec::with_capacity(POINCARE_PANELS * POINCARE_PANELS * POINCARE_ORDER * POINCARE_ORDER);
    let dr = (q.r_hi - q.r_lo) / POINCARE_PANELS as f64;
    let dth = (q.theta_hi - q.theta_lo) / POINCARE_PANELS as f64;
    for a in 0..POINCARE_PANELS {
        let r0 = q.r_lo + a as f64 * dr;
        for (rw, rx) in rule.mapped(r0, r0 + dr) {
            for b in 0..POINCARE_PANELS {
                let t0 = q.theta_lo + b as f64 * dth;
                for (tw, tx) in rule.mapped(t0, t0 + dth) {
                    pts.push((rw * tw * rx, PolarPoint::new(rx, tx)));
                }
            }
        }
    }
    pts
}

/// Geometric-scale bound from tile averages: the largest level M in
/// `m_range` whose averages all satisfy |⨍_Q ρ| ≤ (κ/2)·sup yields the
/// bound 8c·2^{−M}/κ (c the measured tile-diameter constant at that M).
/// Returns +∞ when no level qualifies.
pub fn tile_upper_bound_scale(
    snapshot: &FieldSnapshot,
    kappa: f64,
    m_range: impl IntoIterator<Item = u32>,
) -> f64 {
    assert!(kappa > 0.0 && kappa < 1.0, "accuracy must lie in (0,1)");
    let sup = snapshot.sup_norm();
    let mut best: Option<u32> = None;
    for m in m_range {
        let max_avg = max_abs_tile_average(snapshot, m, 8);
        if max_avg <= 0.5 * kappa * sup {
            best = Some(best.map_or(m, |b| b.max(m)));
        }
    }
    match best {
        Some(m) => 8.0 * tile_diameter_constant(m) * 0.5f64.powi(m as i32) / kappa,
        None => f64::INFINITY,
    }
}

/// Outcome of the negative-norm tile bound check at one level.
#[derive(Debug, Clone)]
pub struct Mpc2Report {
    pub level: u32,
    pub sup_norm: f64,
    /// Hypothesis threshold 2·sup·2^{−M}.
    pub hypothesis_threshold: f64,
    pub max_tile_average: f64,
    pub hypothesis_holds: bool,
    /// Measured norm; present whenever the solve is admissible.
    pub h_minus_one: Option<f64>,
    /// Ḣ⁻¹ / (sup·2^{−M}); the sweep tests its boundedness in M.
    pub empirical_c: Option<f64>,
}

/// Checks the hypothesis |⨍_Q ρ| ≤ 2·sup·2^{−M} over the level-M tiling
/// and reports the measured constant in ‖ρ‖ ≤ C·sup·2^{−M}. When the
/// hypothesis fails the constant is still reported but asserts nothing.
pub fn mpc2_bound_check(snapshot: &FieldSnapshot, level: u32) -> Result<Mpc2Report, MetricError> {
    let sup = snapshot.sup_norm();
    let h = 0.5f64.powi(level as i32);
    let max_avg = max_abs_tile_average(snapshot, level, 8);
    let threshold = 2.0 * sup * h;
    let hypothesis_holds = max_avg <= threshold * (1.0 + 1e-12);
    let norm = h_minus_one_norm(snapshot, 256, 32)?.norm_value;
    let empirical_c = if sup == 0.0 {
        Some(0.0)
    } else {
        Some(norm / (sup * h))
    };
    Ok(Mpc2Report {
        level,
        sup_norm: sup,
        hypothesis_threshold: threshold,
        max_tile_average: max_avg,
        hypothesis_holds,
        h_minus_one: Some(norm),
        empirical_c,
    })
}

/// One instance of the tile-average ⇒ geometric-scale implication.
#[derive(Debug, Clone)]
pub struct MpcImplicationReport {
    pub level: u32,
    pub kappa: f64,
    pub sup_norm: f64,
    pub max_tile_average: f64,
    pub hypothesis_holds: bool,
    /// The proof radius 8c·2^{−M}/κ.
    pub epsilon: f64,
    /// Sup of |ball averages| at that radius; None when vacuous.
    pub ball_sup: Option<f64>,
    /// κ·sup plus the raster slack; None when vacuous.
    pub threshold: Option<f64>,
    /// Conclusion verdict; true when vacuous.
    pub satisfied: bool,
}

/// Tests the implication: tile averages ≤ (κ/2)·sup at level M force every
/// ball average at radius 8c·2^{−M}/κ to stay ≤ κ·sup. The check carries a
/// raster slack of sup·(6h/ε + 1e−6) for the finite grid.
pub fn mpc_implication_check(
    snapshot: &FieldSnapshot,
    kappa: f64,
    level: u32,
    grid_resolution: usize,
) -> Result<MpcImplicationReport, MetricError> {
    assert!(kappa > 0.0 && kappa < 1.0, "accuracy must lie in (0,1)");
    let sup = snapshot.sup_norm();
    let max_avg = max_abs_tile_average(snapshot, level, 8);
    let hypothesis_holds = max_avg <= 0.5 * kappa * sup * (1.0 + 1e-12);
    let epsilon = 8.0 * tile_diameter_constant(level) * 0.5f64.powi(level as i32) / kappa;
    if !hypothesis_holds {
        return Ok(MpcImplicationReport {
            level,
            kappa,
            sup_norm: sup,
            max_tile_average: max_avg,
            hypothesis_holds,
            epsilon,
            ball_sup: None,
            threshold: None,
            satisfied: true,
        });
    }
    let field = ball_average_field(snapshot, epsilon, grid_resolution)?;
    let ball_sup = field.sup();
    let cell = 2.0 / grid_resolution as f64;
    let threshold = kappa * sup + sup * (6.0 * cell / epsilon + 1e-6);
    Ok(MpcImplicationReport {
        level,
        kappa,
        sup_norm: sup,
        max_tile_average: max_avg,
        hypothesis_holds,
        epsilon,
        ball_sup: Some(ball_sup),
        threshold: Some(threshold),
        satisfied: ball_sup <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::{half_disk_datum, zero_datum};
    use crate::flow::FieldSnapshot;
    use crate::testfns::TestFunction;

    #[test]
    fn constant_function_ratio_is_zero() {
        assert_eq!(poincare_ratio(&TestFunction::Constant(3.5), 3), 0.0);
    }

    #[test]
    fn coordinate_ratio_bounded_across_levels() {
        let mut worst = 0.0f64;
        for level in 2..=5 {
            let r = poincare_ratio(&TestFunction::CoordinateX, level);
            assert!(r > 0.0);
            worst = worst.max(r);
        }
        assert!(worst < 4.0, "Poincaré ceiling exceeded: {worst}");
    }

    #[test]
    fn harmonic_ratio_same_ceiling() {
        for level in 2..=5 {
            let r = poincare_ratio(&TestFunction::AngularHarmonic { m: 2 }, level);
            assert!(r > 0.0 && r < 4.0, "level {level}: {r}");
        }
    }

    #[test]
    fn zero_field_bound_uses_max_level() {
        let d = zero_datum();
        let s = FieldSnapshot::new(&d, 1.0);
        let b = tile_upper_bound_scale(&s, 0.5, 2..=4);
        let expected = 8.0 * tile_diameter_constant(4) * 0.0625 / 0.5;
        assert!((b - expected).abs() < 1e-12);
    }

    #[test]
    fn unmixed_half_disk_gives_infinite_bound() {
        let d = half_disk_datum();
        let s = FieldSnapshot::new(&d, 0.0);
        assert!(tile_upper_bound_scale(&s, 0.2, 1..=4).is_infinite());
    }

    #[test]
    fn mpc2_zero_field() {
        let d = zero_datum();
        let s = FieldSnapshot::new(&d, 1.0);
        let r = mpc2_bound_check(&s, 3).unwrap();
        assert!(r.hypothesis_holds);
        assert_eq!(r.empirical_c, Some(0.0));
    }

    #[test]
    fn implication_on_transported_half_disk() {
        let d = half_disk_datum();
        let s = FieldSnapshot::new(&d, 64.0);
        let r = mpc_implication_check(&s, 0.8, 5, 128).unwrap();
        assert!(r.hypothesis_holds, "tile averages: {}", r.max_tile_average);
        assert!(r.satisfied, "ball sup {:?} vs {:?}", r.ball_sup, r.threshold);
    }
}
