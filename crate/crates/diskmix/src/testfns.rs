//! Analytic test functions with exact gradients.
//!
//! Used as the ξ of the tile Poincaré ratio and as the φ of weak pairings.
//! Everything here is given in closed form so the inequality checkers never
//! depend on numerical differentiation.

use crate::geometry::{PolarPoint, Vec2};

/// A scalar function on the closed unit disk with an analytic gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// ξ ≡ c.
    Constant(f64),
    /// ξ(x, y) = x.
    CoordinateX,
    /// ξ(x, y) = x·y.
    SaddleXY,
    /// ξ = Re(z^m) = r^m cos(mθ); harmonic for every m.
    AngularHarmonic { m: u32 },
    /// ξ = sin(πx)·sin(πy).
    SineProduct,
    /// ξ = exp(x + y).
    Exponential,
    /// Smooth bump exp(1 − 1/(1 − (r/R)²)) supported on r < R.
    Bump { radius: f64 },
    /// ξ = cos(π r²); radially symmetric and analytic.
    RadialCosine,
}

impl TestFunction {
    pub fn eval(&self, p: PolarPoint) -> f64 {
        let xy = p.to_xy();
        let (x, y) = (xy.x, xy.y);
        match *self {
            TestFunction::Constant(c) => c,
            TestFunction::CoordinateX => x,
            TestFunction::SaddleXY => x * y,
            TestFunction::AngularHarmonic { m } => {
                p.r.powi(m as i32) * (m as f64 * p.theta).cos()
            }
            TestFunction::SineProduct => {
                (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
            }
            TestFunction::Exponential => (x + y).exp(),
            TestFunction::Bump { radius } => bump_value(p.r, radius),
            TestFunction::RadialCosine => (std::f64::consts::PI * p.r * p.r).cos(),
        }
    }

    /// Cartesian gradient at p.
    pub fn gradient(&self, p: PolarPoint) -> Vec2 {
        let xy = p.to_xy();
        let (x, y) = (xy.x, xy.y);
        match *self {
            TestFunction::Constant(_) => Vec2::new(0.0, 0.0),
            TestFunction::CoordinateX => Vec2::new(1.0, 0.0),
            TestFunction::SaddleXY => Vec2::new(y, x),
            TestFunction::AngularHarmonic { m } => {
                // for holomorphic g, ∇Re g = (Re g′, −Im g′); g = z^m
                if m == 0 {
                    return Vec2::new(0.0, 0.0);
                }
                let k = (m - 1) as f64;
                let rp = p.r.powi((m - 1) as i32);
                let (s, c) = (k * p.theta).sin_cos();
                let scale = m as f64 * rp;
                Vec2::new(scale * c, -scale * s)
            }
            TestFunction::SineProduct => {
                let pi = std::f64::consts::PI;
                Vec2::new(
                    pi * (pi * x).cos() * (pi * y).sin(),
                    pi * (pi * x).sin() * (pi * y).cos(),
                )
            }
            TestFunction::Exponential => {
                let e = (x + y).exp();
                Vec2::new(e, e)
            }
            TestFunction::Bump { radius } => {
                let u = (p.r / radius) * (p.r / radius);
                if u >= 1.0 {
                    return Vec2::new(0.0, 0.0);
                }
                let f = bump_value(p.r, radius);
                let denom = 1.0 - u;
                // d/du of −1/(1−u) is −1/(1−u)²; chain through u = r²/R²
                let dfdu = -f / (denom * denom);
                let scale = dfdu * 2.0 / (radius * radius);
                Vec2::new(scale * x, scale * y)
            }
            TestFunction::RadialCosine => {
                let pi = std::f64::consts::PI;
                let s = -(pi * p.r * p.r).sin() * 2.0 * pi;
                Vec2::new(s * x, s * y)
            }
        }
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        self.eval(PolarPoint::from_xy(x, y))
    }
}

fn bump_value(r: f64, radius: f64) -> f64 {
    let u = (r / radius) * (r / radius);
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u)).exp()
    }
}

/// The five functions the inequality sweeps run over: a coordinate, a
/// saddle, a degree-2 harmonic, a tensor sine, and an exponential.
pub fn standard_suite() -> [TestFunction; 5] {
    [
        TestFunction::CoordinateX,
        TestFunction::SaddleXY,
        TestFunction::AngularHarmonic { m: 2 },
        TestFunction::SineProduct,
        TestFunction::Exponential,
    ]
}

/// Bump supported strictly inside the inner disk of radius 1/√2; its
/// support never meets the stationary-annulus sign change.
pub fn inner_bump() -> TestFunction {
    TestFunction::Bump {
        radius: std::f64::consts::FRAC_1_SQRT_2,
    }
}
