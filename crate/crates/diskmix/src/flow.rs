//! The stationary radial shear on the unit disk and its exact solution map.
//!
//! The velocity is u(r,θ) = 2πr²(sinθ, −cosθ), which rotates each circle of
//! radius r rigidly with angular rate 2πr. Densities are transported exactly
//! by rotating angles back along the flow; nothing is discretized here.
//!
//! Orientation note: we take the solution ρ(t, r, θ) = ρ₀(r, θ − 2πtr). The
//! Cartesian form of u integrates to the oppositely-signed rotation; the two
//! conventions differ by a reflection θ ↦ −θ and give identical values for
//! every mixing quantity used here (all are reflection-invariant), so the
//! simpler sign is used throughout and tested against itself.

use crate::datum::ScalarDatum;
use crate::geometry::{wrap_angle, PolarPoint, Vec2, TWO_PI};

/// Velocity in Cartesian components at a polar point.
pub fn velocity(p: PolarPoint) -> Vec2 {
    let s = TWO_PI * p.r * p.r;
    Vec2::new(s * p.theta.sin(), -s * p.theta.cos())
}

/// Transports a sample point back to time 0: (r, θ) ↦ (r, θ − 2πtr).
pub fn pullback_point(p: PolarPoint, t: f64) -> PolarPoint {
    PolarPoint::new(p.r, wrap_angle(p.theta - TWO_PI * t * p.r))
}

/// The forward flow map for time t: (r, θ) ↦ (r, θ + 2πtr).
pub fn forward_point(p: PolarPoint, t: f64) -> PolarPoint {
    PolarPoint::new(p.r, wrap_angle(p.theta + TWO_PI * t * p.r))
}

/// ρ(t, p) = ρ₀(pullback of p). Zero outside the closed unit disk.
pub fn evaluate_solution(datum: &ScalarDatum, t: f64, p: PolarPoint) -> f64 {
    if p.r > 1.0 {
        return 0.0;
    }
    datum.eval(p.r, p.theta - TWO_PI * t * p.r)
}

/// A transported field ρ(t,·): borrow of the datum plus the time.
///
/// Copyable view; all evaluation is pure, so snapshots can be shared freely
/// across threads.
#[derive(Debug, Clone, Copy)]
pub struct FieldSnapshot<'a> {
    pub datum: &'a ScalarDatum,
    pub t: f64,
}

impl<'a> FieldSnapshot<'a> {
    pub fn new(datum: &'a ScalarDatum, t: f64) -> Self {
        assert!(t >= 0.0 && t.is_finite());
        Self { datum, t }
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        if r > 1.0 {
            return 0.0;
        }
        self.datum.eval(r, theta - TWO_PI * self.t * r)
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        let p = PolarPoint::from_xy(x, y);
        self.eval(p.r, p.theta)
    }

    /// Transport preserves the sup norm exactly.
    pub fn sup_norm(&self) -> f64 {
        self.datum.sup_norm()
    }
}

/// Finite-difference estimate of the Lipschitz constant of the time-t flow
/// map. Probes point pairs at radii {0.25, 0.5, 0.75, 1.0} (the gradient is
/// largest at r = 1) over `probe_count` angular base points and several
/// displacement directions of length `step`, and reports the max ratio
/// |Φ_t(p) − Φ_t(q)| / |p − q|.
///
/// The exact constant is the largest singular value of the map differential,
/// (c + √(c² + 4))/2 with c = 2πtr, so the estimate grows linearly in t.
pub fn lipschitz_estimate(t: f64, probe_count: usize, step: f64) -> f64 {
    assert!(step > 0.0 && probe_count >= 1);
    let radii = [0.25, 0.5, 0.75, 1.0];
    let dirs = 8;
    let mut best = 0.0f64;
    for &r in &radii {
        for k in 0..probe_count {
            let theta = TWO_PI * (k as f64 + 0.37) / probe_count as f64;
            let p = PolarPoint::new(r, theta);
            let a = forward_point(p, t).to_xy();
            let base_pt = p.to_xy();
            let (px, py) = (base_pt.x, base_pt.y);
            for d in 0..dirs {
                let phi = TWO_PI * d as f64 / dirs as f64;
                let qx = px + step * phi.cos();
                let qy = py + step * phi.sin();
                let q = PolarPoint::from_xy(qx, qy);
                if q.r > 1.0 {
                    continue;
                }
                let b = forward_point(q, t).to_xy();
                let moved = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
                let base = ((px - qx).powi(2) + (py - qy).powi(2)).sqrt();
                best = best.max(moved / base);
            }
        }
    }
    best
}

/// Exact Lipschitz constant of the time-t flow map (largest singular value
/// of its differential at r = 1).
pub fn lipschitz_exact(t: f64) -> f64 {
    let c = TWO_PI * t;
    0.5 * (c + (c * c + 4.0).sqrt())
}
