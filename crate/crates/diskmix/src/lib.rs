//! Mixing of a passive scalar by a stationary shear flow on the unit disk.
//!
//! The velocity field rotates each circle of radius r at angular speed
//! 2πr, so an initial datum ρ₀ evolves exactly by angular pullback:
//! ρ(t, r, θ) = ρ₀(r, θ − 2πtr). No PDE is discretized anywhere; every
//! quantity in this crate is computed from that closed-form solution.
//!
//! What the crate measures:
//!
//! * **geometric mixing scale** — the smallest ball radius ε at which all
//!   ε-ball averages of ρ(t,·) drop below an accuracy fraction κ of the
//!   sup norm ([`metrics::geometric`]);
//! * **functional mixing scale** — the negative Sobolev norm Ḣ⁻¹ via
//!   per-mode radial Neumann solves ([`metrics::functional`]);
//! * **tile averages** over an annular tiling of the disk, both by direct
//!   quadrature ([`tiling`]) and by an independent exact closed form for
//!   step data ([`closed_form`]), which double-check each other;
//! * **inequalities** tying these together — tile Poincaré, and the two
//!   bounds deducing mixing scales from small tile averages
//!   ([`metrics::inequalities`]);
//! * **decay rates** — log-log slope fits over geometric time grids,
//!   orchestrated by the experiment harness ([`harness`]).
//!
//! Initial data live in [`datum`]: step-radial profiles on dyadic annuli,
//! banded radial data, smooth angular modes, or sampled polar grids, all
//! carrying a zero-circular-mean flag (the necessary and sufficient
//! condition for this flow to mix).
//!
//! The heavy loops (rasters, convolutions, per-mode solves, per-tile
//! sweeps) run data-parallel by default; build with
//! `--no-default-features` for a fully sequential core with identical
//! results.

pub mod approx;
pub mod closed_form;
pub mod datum;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod par;
pub mod quadrature;
pub mod special;
pub mod testfns;
pub mod tiling;
