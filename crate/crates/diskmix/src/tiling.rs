//! Annular tilings of the unit disk with bounded eccentricity.
//!
//! Level M splits the disk into 2^M dyadic annuli; annulus i carries i+1
//! equal angular sectors, so tiles stay roughly square (radial width 2^{−M},
//! arc length between 2^{−M}·2π·i/(i+1) and 2^{−M}·2π). The innermost
//! "annulus" is the disk of radius 2^{−M}, kept whole.
//!
//! All intervals are half-open (lo, hi]: ties in `locate` fall inward.

use crate::datum::DatumKind;
use crate::flow::FieldSnapshot;
use crate::geometry::{wrap_angle, PolarPoint, TWO_PI};
use crate::par;
use crate::quadrature;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("point radius {0} outside the unit disk")]
    RadiusOutOfRange(f64),
    #[error("tiling level must be ≥ 1, got {0}")]
    LevelTooCoarse(u32),
    #[error("sub-tiling level {fine} below tile level {coarse}")]
    SubtileLevel { coarse: u32, fine: u32 },
}

/// One tile Q at a given level: r ∈ (r_lo, r_hi], θ ∈ (theta_lo, theta_hi].
/// The center tile (i=0, j=0) is the full disk of radius 2^{−level}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnularTile {
    pub level: u32,
    pub i: u32,
    pub j: u32,
    pub r_lo: f64,
    pub r_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl AnnularTile {
    pub fn new(level: u32, i: u32, j: u32) -> Self {
        debug_assert!(level >= 1 && i < (1 << level) && j <= i);
        let h = (1u64 << level) as f64;
        let sectors = (i + 1) as f64;
        Self {
            level,
            i,
            j,
            r_lo: i as f64 / h,
            r_hi: (i + 1) as f64 / h,
            theta_lo: TWO_PI * j as f64 / sectors,
            theta_hi: TWO_PI * (j + 1) as f64 / sectors,
        }
    }

    /// Lebesgue area ∫∫ r dr dθ.
    pub fn area(&self) -> f64 {
        0.5 * (self.r_hi * self.r_hi - self.r_lo * self.r_lo) * (self.theta_hi - self.theta_lo)
    }

    /// Exact Euclidean diameter of the annular sector.
    pub fn diameter(&self) -> f64 {
        let dth = self.theta_hi - self.theta_lo;
        if dth >= std::f64::consts::PI {
            return 2.0 * self.r_hi;
        }
        // candidates: outer-arc chord, opposite corners, radial width
        let chord = 2.0 * self.r_hi * (0.5 * dth).sin();
        let cross = (self.r_lo * self.r_lo + self.r_hi * self.r_hi
            - 2.0 * self.r_lo * self.r_hi * dth.cos())
        .sqrt();
        chord.max(cross).max(self.r_hi - self.r_lo)
    }

    pub fn centroid(&self) -> PolarPoint {
        PolarPoint::new(
            0.5 * (self.r_lo + self.r_hi),
            wrap_angle(0.5 * (self.theta_lo + self.theta_hi)),
        )
    }

    pub fn contains(&self, p: PolarPoint) -> bool {
        let r_ok = if self.i == 0 {
            p.r <= self.r_hi // center disk keeps r = 0
        } else {
            p.r > self.r_lo && p.r <= self.r_hi
        };
        if !r_ok {
            return false;
        }
        let mut th = wrap_angle(p.theta);
        if th == 0.0 {
            th = TWO_PI;
        }
        th > self.theta_lo && th <= self.theta_hi
    }
}

/// Radial slice of a tile used when a finer annulus structure cuts through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubTile {
    pub r_lo: f64,
    pub r_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl SubTile {
    pub fn area(&self) -> f64 {
        0.5 * (self.r_hi * self.r_hi - self.r_lo * self.r_lo) * (self.theta_hi - self.theta_lo)
    }
}

/// Number of tiles at a level: Σ_{i<2^M} (i+1) = 2^{M−1}(2^M + 1).
pub fn tile_count(level: u32) -> usize {
    let n = 1usize << level;
    n * (n + 1) / 2
}

/// All tiles at a level, ordered by (i, j).
pub fn build_tiling(level: u32) -> Result<Vec<AnnularTile>, TilingError> {
    if level < 1 {
        return Err(TilingError::LevelTooCoarse(level));
    }
    let mut tiles = Vec::with_capacity(tile_count(level));
    for i in 0..(1u32 << level) {
        for j in 0..=i {
            tiles.push(AnnularTile::new(level, i, j));
        }
    }
    Ok(tiles)
}

/// Tile indices (i, j) of the tile containing p. r = 0 maps to (0, 0); r > 1
/// is an error; boundary radii and angles belong to the inner/lower tile.
pub fn locate(p: PolarPoint, level: u32) -> Result<(u32, u32), TilingError> {
    if level < 1 {
        return Err(TilingError::LevelTooCoarse(level));
    }
    if p.r > 1.0 + 1e-12 {
        return Err(TilingError::RadiusOutOfRange(p.r));
    }
    let r = p.r.min(1.0);
    let h = (1u64 << level) as f64;
    let i = ((r * h).ceil() as i64 - 1).clamp(0, (1 << level) - 1) as u32;
    let mut th = wrap_angle(p.theta);
    if th == 0.0 {
        th = TWO_PI;
    }
    let sectors = (i + 1) as f64;
    let j = ((th * sectors / TWO_PI).ceil() as i64 - 1).clamp(0, i as i64) as u32;
    Ok((i, j))
}

/// Radial split of a tile into 2^{fine−coarse} slices of width 2^{−fine}.
pub fn subtiles(q: &AnnularTile, fine: u32) -> Result<Vec<SubTile>, TilingError> {
    if fine < q.level {
        return Err(TilingError::SubtileLevel {
            coarse: q.level,
            fine,
        });
    }
    let parts = 1u32 << (fine - q.level);
    let w = (q.r_hi - q.r_lo) / parts as f64;
    Ok((0..parts)
        .map(|k| SubTile {
            r_lo: q.r_lo + k as f64 * w,
            r_hi: q.r_lo + (k + 1) as f64 * w,
            theta_lo: q.theta_lo,
            theta_hi: q.theta_hi,
        })
        .collect())
}

/// Measured tile-diameter constant: max over tiles of diameter·2^level.
pub fn tile_diameter_constant(level: u32) -> f64 {
    build_tiling(level)
        .unwrap()
        .iter()
        .map(|q| q.diameter() * (1u64 << level) as f64)
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// quadrature tile averages

/// Radii in (r_lo, r_hi) where the datum changes radial piece.
fn radial_breaks(kind: &DatumKind, r_lo: f64, r_hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    match kind {
        DatumKind::StepRadial { level, .. } => {
            let h = (1u64 << *level) as f64;
            let mut k = (r_lo * h).floor() as i64 + 1;
            while (k as f64) / h < r_hi {
                let r = k as f64 / h;
                if r > r_lo {
                    out.push(r);
                }
                k += 1;
            }
        }
        DatumKind::Banded { bands } => {
            for b in bands {
                if b.r_hi > r_lo && b.r_hi < r_hi {
                    out.push(b.r_hi);
                }
            }
        }
        DatumKind::Modal { .. } | DatumKind::Sampled { .. } => {}
    }
    out
}

/// Kink radii of r ↦ ∫_{θlo}^{θhi} f(θ − 2πtr) dθ inside (r_lo, r_hi): radii
/// where some profile breakpoint crosses either window edge, i.e.
/// θ_edge − 2πtr ≡ b (mod 2π).
fn kink_radii(
    breakpoints: &[f64],
    theta_edges: [f64; 2],
    t: f64,
    r_lo: f64,
    r_hi: f64,
    out: &mut Vec<f64>,
) {
    if t == 0.0 {
        return;
    }
    let c = TWO_PI * t;
    for &edge in &theta_edges {
        for &b in breakpoints {
            // r = (edge − b − 2πk)/c ∈ (r_lo, r_hi)
            let k_lo = ((edge - b - c * r_hi) / TWO_PI).floor() as i64;
            let k_hi = ((edge - b - c * r_lo) / TWO_PI).ceil() as i64;
            for k in k_lo..=k_hi {
                let r = (edge - b - TWO_PI * k as f64) / c;
                if r > r_lo + 1e-15 && r < r_hi - 1e-15 {
                    out.push(r);
                }
            }
        }
    }
}

fn sorted_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
}

/// Tensor quadrature of ⨍_Q ρ(t,·) with the polar r weight.
///
/// Step-like data: the θ-integral at fixed r is summed exactly by interval
/// clipping (`StepProfile::integrate_shifted`), and the radial integration is
/// split at every kink radius, where the integrand is piecewise quadratic, so
/// the result is exact up to roundoff. Modal and sampled data use tensor
/// Gauss panels sized to the angular oscillation transferred into r.
///
/// This route deliberately shares nothing with the antiderivative-based
/// closed form: it is the independent check.
pub fn tile_average_quadrature(snapshot: &FieldSnapshot, q: &AnnularTile, order: usize) -> f64 {
    assert!(order >= 2);
    let area = q.area();
    debug_assert!(area > 0.0);
    let t = snapshot.t;
    match snapshot.datum.kind() {
        DatumKind::StepRadial { level, profiles } => {
            let mut breaks = radial_breaks(snapshot.datum.kind(), q.r_lo, q.r_hi);
            breaks.push(q.r_lo);
            breaks.push(q.r_hi);
            sorted_dedup(&mut breaks);
            let mut integral = 0.0;
            for w in breaks.windows(2) {
                let idx = crate::datum::annulus_index(0.5 * (w[0] + w[1]), *level);
                let p = &profiles[idx];
                integral += slab_integral_step(p, q, t, w[0], w[1], order);
            }
            integral / area
        }
        DatumKind::Banded { bands } => {
            let mut breaks = radial_breaks(snapshot.datum.kind(), q.r_lo, q.r_hi);
            breaks.push(q.r_lo);
            breaks.push(q.r_hi);
            sorted_dedup(&mut breaks);
            let mut integral = 0.0;
            for w in breaks.windows(2) {
                let rm = 0.5 * (w[0] + w[1]);
                let bi = bands.partition_point(|b| b.r_hi < rm).min(bands.len() - 1);
                match &bands[bi].profile {
                    crate::datum::AngularProfile::Const(c) => {
                        integral += c
                            * 0.5
                            * (w[1] * w[1] - w[0] * w[0])
                            * (q.theta_hi - q.theta_lo);
                    }
                    crate::datum::AngularProfile::Steps(p) => {
                        integral += slab_integral_step(p, q, t, w[0], w[1], order);
                    }
                }
            }
            integral / area
        }
        DatumKind::Modal { modes } => {
            let m_max = modes.iter().map(|m| m.m).max().unwrap_or(1) as f64;
            let radial_osc = (q.r_hi - q.r_lo) * t * m_max;
            let r_panels = (radial_osc.ceil() as usize + 2).clamp(2, 4096);
            let th_panels =
                (((q.theta_hi - q.theta_lo) * m_max / std::f64::consts::PI).ceil() as usize + 1)
                    .clamp(1, 256);
            tensor_average(snapshot, q, order, r_panels, th_panels) / area
        }
        DatumKind::Sampled { grid } => {
            let m_max = (grid.thetas().len() / 2).max(1) as f64;
            let radial_osc = (q.r_hi - q.r_lo) * t * m_max;
            let r_grid = ((q.r_hi - q.r_lo) * grid.radii().len() as f64).ceil() as usize;
            let r_panels = (radial_osc.ceil() as usize + r_grid + 2).clamp(2, 4096);
            let th_panels = (((q.theta_hi - q.theta_lo) / TWO_PI
                * grid.thetas().len() as f64)
                .ceil() as usize
                + 1)
            .clamp(1, 512);
            tensor_average(snapshot, q, order, r_panels, th_panels) / area
        }
    }
}

/// ∫_slab ∫_θ f(θ − 2πtr) r dθ dr over one radial slab of a tile, with the
/// inner integral exact and the outer split at kinks.
fn slab_integral_step(
    p: &crate::datum::StepProfile,
    q: &AnnularTile,
    t: f64,
    r_lo: f64,
    r_hi: f64,
    order: usize,
) -> f64 {
    let mut panels = vec![r_lo, r_hi];
    kink_radii(
        p.breakpoints(),
        [q.theta_lo, q.theta_hi],
        t,
        r_lo,
        r_hi,
        &mut panels,
    );
    sorted_dedup(&mut panels);
    quadrature::integrate_split(&panels, order.max(3), |r| {
        r * p.integrate_shifted(q.theta_lo, q.theta_hi, TWO_PI * t * r)
    })
}

fn tensor_average(
    snapshot: &FieldSnapshot,
    q: &AnnularTile,
    order: usize,
    r_panels: usize,
    th_panels: usize,
) -> f64 {
    let mut acc = 0.0;
    for ir in 0..r_panels {
        let a = q.r_lo + (q.r_hi - q.r_lo) * ir as f64 / r_panels as f64;
        let b = q.r_lo + (q.r_hi - q.r_lo) * (ir + 1) as f64 / r_panels as f64;
        acc += quadrature::integrate(a, b, order, |r| {
            let mut inner = 0.0;
            for it in 0..th_panels {
                let ta = q.theta_lo + (q.theta_hi - q.theta_lo) * it as f64 / th_panels as f64;
                let tb =
                    q.theta_lo + (q.theta_hi - q.theta_lo) * (it + 1) as f64 / th_panels as f64;
                inner += quadrature::integrate(ta, tb, order, |th| snapshot.eval(r, th));
            }
            inner * r
        });
    }
    acc
}

/// Tile averages over the whole tiling, fastest available route per datum:
/// closed form for step-like data, quadrature otherwise. Output is ordered
/// like `build_tiling`.
pub fn tile_averages(snapshot: &FieldSnapshot, level: u32, order: usize) -> Vec<f64> {
    let tiles = build_tiling(level).expect("level ≥ 1");
    let use_closed_form = matches!(
        snapshot.datum.kind(),
        DatumKind::StepRadial { .. } | DatumKind::Banded { .. }
    ) && crate::closed_form::closed_form_applicable(snapshot.datum);
    par::map_indexed(tiles.len(), |k| {
        let q = &tiles[k];
        if use_closed_form {
            crate::closed_form::exact_tile_average(snapshot.datum, q, snapshot.t, 8)
                .expect("closed form applicable")
        } else {
            tile_average_quadrature(snapshot, q, order)
        }
    })
}

/// max_Q |⨍_Q ρ(t,·)| at a level.
pub fn max_abs_tile_average(snapshot: &FieldSnapshot, level: u32, order: usize) -> f64 {
    tile_averages(snapshot, level, order)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// CSV dump `M,i,j,r_lo,r_hi,theta_lo,theta_hi,average` for plotting.
pub fn write_tile_averages_csv(
    path: &std::path::Path,
    snapshot: &FieldSnapshot,
    level: u32,
    order: usize,
) -> std::io::Result<()> {
    use std::io::Write;
    let tiles = build_tiling(level).expect("level ≥ 1");
    let avgs = tile_averages(snapshot, level, order);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "M,i,j,r_lo,r_hi,theta_lo,theta_hi,average")?;
    for (q, a) in tiles.iter().zip(&avgs) {
        writeln!(
            out,
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            q.level, q.i, q.j, q.r_lo, q.r_hi, q.theta_lo, q.theta_hi, a
        )?;
    }
    out.flush()
}
