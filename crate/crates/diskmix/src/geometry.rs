//! Polar and Cartesian points, angle folding.
//!
//! Angles live in [0, 2π). Folding helpers are written so that exact
//! multiples of 2π map to themselves and the floor/ceil pair always
//! brackets the input, even when `y / 2π` rounds to an integer.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    pub fn from_xy(x: f64, y: f64) -> Self {
        Self {
            r: x.hypot(y),
            theta: wrap_angle(y.atan2(x)),
        }
    }

    pub fn to_xy(self) -> Vec2 {
        Vec2 {
            x: self.r * self.theta.cos(),
            y: self.r * self.theta.sin(),
        }
    }
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Floored modulo of an angle into [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta - TWO_PI * (theta / TWO_PI).floor();
    // rounding can land exactly on 2π for tiny negative inputs
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

/// Largest multiple of 2π at or below `y`.
pub fn floor_two_pi(y: f64) -> f64 {
    let mut f = TWO_PI * (y / TWO_PI).floor();
    if f > y {
        f -= TWO_PI;
    }
    f
}

/// Smallest multiple of 2π at or above `y`.
pub fn ceil_two_pi(y: f64) -> f64 {
    let mut c = TWO_PI * (y / TWO_PI).ceil();
    if c < y {
        c += TWO_PI;
    }
    c
}
