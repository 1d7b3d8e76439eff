//! The functional mixing meter: negative Sobolev norms via radial Neumann
//! solves.
//!
//! Expanding ρ(t,·) in angular Fourier modes, the dual problem −Δξ = ρ with
//! ∂ξ/∂n = 0 on the boundary circle decouples into radial two-point problems
//!
//!   −(1/r)(r ξ_m′)′ + (m²/r²) ξ_m = ρ_m,   ξ_m′(1) = 0,  ξ_m(0) = 0 (m ≥ 1),
//!
//! discretized by a finite-volume scheme on a graded mesh r_i = sin(πi/2n)
//! that clusters nodes near r = 1, where transport oscillation in r is
//! fastest. The norm is ‖ρ‖² = Σ_m ∫(|ξ_m′|² + m²|ξ_m|²/r²) r dr (with the
//! angular π/2π weights), which equals ∫ρξ by duality; the solve is direct
//! (Thomas), so the two agree to roundoff and the gap is reported.
//!
//! Mode coefficients never touch a rasterizer: transport at fixed radius is
//! a rotation, so coefficients of the transported field are the initial
//! ones rotated by m·2πtr. Per-mode radial resolution grows as ~25 points
//! per oscillation cycle (m·t cycles across the radius), capped for safety.

use super::MetricError;
use crate::datum::{AngularProfile, DatumKind, ScalarDatum};
use crate::flow::FieldSnapshot;
use crate::geometry::TWO_PI;
use crate::par;
use std::f64::consts::PI;

/// Radial solution of one angular mode (decimated for storage).
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub m: u32,
    /// Full node count actually used for this mode.
    pub node_count: usize,
    /// Decimated sample radii.
    pub radii: Vec<f64>,
    /// ξ for the cos(mθ) component at `radii`.
    pub cosine: Vec<f64>,
    /// ξ for the sin(mθ) component at `radii`.
    pub sine: Vec<f64>,
    /// Dirichlet energy contribution of this mode (angular weight included).
    pub energy: f64,
    /// ∫ρ_m ξ_m contribution (angular weight included).
    pub pairing: f64,
}

/// Outcome of the Neumann solve across modes.
#[derive(Debug, Clone)]
pub struct NeumannSolve {
    /// The negative-norm value √(Σ_m pairing_m).
    pub norm_value: f64,
    /// Max over modes of the normwise backward error
    /// ‖Aξ − b‖_∞ / (‖A‖_∞‖ξ‖_∞ + ‖b‖_∞).
    pub residual: f64,
    /// Relative disagreement between Σ energies and Σ pairings.
    pub duality_gap: f64,
    pub mode_solutions: Vec<ModeSolution>,
}

impl NeumannSolve {
    /// Debug dump of the mode spectrum: per-mode energy and pairing.
    pub fn write_spectrum_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "m,node_count,energy,pairing")?;
        for s in &self.mode_solutions {
            writeln!(
                out,
                "{},{},{:.12e},{:.12e}",
                s.m, s.node_count, s.energy, s.pairing
            )?;
        }
        Ok(())
    }
}

const MIN_RADIAL: usize = 64;
const MIN_MODES: usize = 32;
const POINTS_PER_CYCLE: f64 = 25.0;
const MAX_NODES: usize = 2_000_000;
const STORE_CAP: usize = 129;

/// Homogeneous negative norm ‖ρ(t,·)‖ via the Neumann solve. Requires the
/// global mean to vanish; the radial (m=0) part is handled by direct
/// integration when circle means are nonzero but globally balanced.
pub fn h_minus_one_norm(
    snapshot: &FieldSnapshot,
    radial_resolution: usize,
    mode_count: usize,
) -> Result<NeumannSolve, MetricError> {
    solve(snapshot, radial_resolution, mode_count, false)
}

/// Inhomogeneous variant: solves (−Δ + 1)ξ = ρ, the dual of the full
/// H¹ norm. Defined for any bounded datum (the mass term regularizes the
/// constant mode), and sandwiched between multiples of the homogeneous norm
/// for mean-free data.
pub fn h_minus_one_inhomogeneous(
    snapshot: &FieldSnapshot,
    radial_resolution: usize,
    mode_count: usize,
) -> Result<NeumannSolve, MetricError> {
    solve(snapshot, radial_resolution, mode_count, true)
}

fn solve(
    snapshot: &FieldSnapshot,
    radial_resolution: usize,
    mode_count: usize,
    with_mass: bool,
) -> Result<NeumannSolve, MetricError> {
    if radial_resolution < MIN_RADIAL {
        return Err(MetricError::ResolutionTooLow {
            given: radial_resolution,
            minimum: MIN_RADIAL,
        });
    }
    if mode_count < MIN_MODES {
        return Err(MetricError::ModeCountTooLow {
            given: mode_count,
            minimum: MIN_MODES,
        });
    }
    let provider = CoeffProvider::build(snapshot.datum, mode_count);
    let t = snapshot.t;

    // m = 0: radial part
    let mut results: Vec<ModeSolution> = Vec::new();
    let mut residual = 0.0f64;
    if with_mass {
        if provider.has_radial_part() || provider_always_solve_m0(snapshot.datum) {
            let (sol, res) = solve_mode_fv(
                0,
                radial_resolution,
                |r| (provider.radial_mean(r), 0.0),
                true,
            );
            residual = residual.max(res);
            results.push(sol);
        }
    } else if provider.has_radial_part() {
        let mean = provider.global_mean();
        let tol = 1e-8 * (1.0 + snapshot.datum.sup_norm());
        if mean.abs() > tol {
            return Err(MetricError::GlobalMeanNonzero { mean });
        }
        results.push(solve_m0_direct(&provider, radial_resolution));
    }

    // m ≥ 1 in parallel
    let active = provider.active_modes();
    let solved: Vec<(ModeSolution, f64)> = par::map_indexed(active.len(), |k| {
        let m = active[k];
        let n = per_mode_resolution(radial_resolution, m, t);
        solve_mode_fv(m, n, |r| provider.coeff(m, r, t), with_mass)
    });
    for (sol, res) in solved {
        residual = residual.max(res);
        results.push(sol);
    }

    let total_energy: f64 = results.iter().map(|s| s.energy).sum();
    let total_pairing: f64 = results.iter().map(|s| s.pairing).sum();
    let scale = total_pairing.abs().max(1e-300);
    let duality_gap = (total_energy - total_pairing).abs() / scale;
    Ok(NeumannSolve {
        norm_value: total_pairing.max(0.0).sqrt(),
        residual,
        duality_gap,
        mode_solutions: results,
    })
}

fn per_mode_resolution(base: usize, m: u32, t: f64) -> usize {
    let osc = (POINTS_PER_CYCLE * m as f64 * t).ceil() as usize;
    base.max(osc).min(MAX_NODES)
}

fn provider_always_solve_m0(datum: &ScalarDatum) -> bool {
    // with the mass term, a plain constant still has a finite norm; solve
    // m=0 whenever the datum is not identically structured without it
    !matches!(datum.kind(), DatumKind::Modal { .. })
}

// ---------------------------------------------------------------------------
// mode coefficients

/// Angular Fourier data of the untransported datum, rotated per evaluation.
enum CoeffProvider<'a> {
    /// Per radial piece (r_hi, per-mode (a, b) table), step-like data.
    StepLike {
        pieces: Vec<StepPiece>,
        global_mean: f64,
    },
    Modal {
        modes: &'a [crate::datum::Mode],
    },
    Sampled {
        radii: &'a [f64],
        /// Per grid radius, per mode: (a, b); mode m at column m−1.
        coeff_rows: Vec<Vec<(f64, f64)>>,
        means: Vec<f64>,
        global_mean: f64,
    },
}

struct StepPiece {
    r_hi: f64,
    mean: f64,
    /// (a_m, b_m) for m = 1..=mode_count.
    coeffs: Vec<(f64, f64)>,
}

impl<'a> CoeffProvider<'a> {
    fn build(datum: &'a ScalarDatum, mode_count: usize) -> Self {
        match datum.kind() {
            DatumKind::StepRadial { level, profiles } => {
                let h = (1u64 << *level) as f64;
                let pieces = profiles
                    .iter()
                    .enumerate()
                    .map(|(i, p)| StepPiece {
                        r_hi: (i + 1) as f64 / h,
                        mean: p.mean(),
                        coeffs: (1..=mode_count as u32)
                            .map(|m| p.fourier_coefficient(m))
                            .collect(),
                    })
                    .collect();
                CoeffProvider::StepLike {
                    pieces,
                    global_mean: 0.0,
                }
            }
            DatumKind::Banded { bands } => {
                let mut pieces = Vec::with_capacity(bands.len());
                let mut r_lo = 0.0;
                let mut global = 0.0;
                for b in bands {
                    let (mean, coeffs) = match &b.profile {
                        AngularProfile::Const(c) => {
                            (*c, vec![(0.0, 0.0); mode_count])
                        }
                        AngularProfile::Steps(p) => (
                            p.mean(),
                            (1..=mode_count as u32)
                                .map(|m| p.fourier_coefficient(m))
                                .collect(),
                        ),
                    };
                    global += mean * (b.r_hi * b.r_hi - r_lo * r_lo);
                    pieces.push(StepPiece {
                        r_hi: b.r_hi,
                        mean,
                        coeffs,
                    });
                    r_lo = b.r_hi;
                }
                CoeffProvider::StepLike {
                    pieces,
                    global_mean: global,
                }
            }
            DatumKind::Modal { modes } => CoeffProvider::Modal { modes },
            DatumKind::Sampled { grid } => {
                let n_theta = grid.thetas().len();
                if n_theta > 65_536 {
                    log::warn!("sampled grid has {n_theta} angle nodes; Fourier extraction is O(modes·nodes) per radius");
                }
                let rows: Vec<Vec<(f64, f64)>> = (0..grid.radii().len())
                    .map(|i| {
                        let row =
                            &grid.values()[i * n_theta..(i + 1) * n_theta];
                        piecewise_linear_fourier(grid.thetas(), row, mode_count)
                    })
                    .collect();
                let means: Vec<f64> = (0..grid.radii().len())
                    .map(|i| {
                        let row = &grid.values()[i * n_theta..(i + 1) * n_theta];
                        periodic_mean(grid.thetas(), row)
                    })
                    .collect();
                // global mean of the interpolant, trapezoid in r
                let mut global = 0.0;
                let radii = grid.radii();
                let mut prev_r = 0.0;
                let mut prev_m = means[0];
                for (k, &r) in radii.iter().enumerate() {
                    global += (prev_m * prev_r + means[k] * r) * (r - prev_r);
                    prev_r = r;
                    prev_m = means[k];
                }
                global += prev_m * (1.0 - prev_r) * (1.0 + prev_r);
                CoeffProvider::Sampled {
                    radii,
                    coeff_rows: rows,
                    means,
                    global_mean: global,
                }
            }
        }
    }

    /// (a_m, b_m) of the transported field at radius r: initial coefficients
    /// rotated by s = m·2πtr.
    fn coeff(&self, m: u32, r: f64, t: f64) -> (f64, f64) {
        let (a0, b0) = match self {
            CoeffProvider::StepLike { pieces, .. } => {
                let k = pieces
                    .partition_point(|p| p.r_hi < r)
                    .min(pieces.len() - 1);
                pieces[k].coeffs[(m - 1) as usize]
            }
            CoeffProvider::Modal { modes } => {
                let mut a = 0.0;
                let mut b = 0.0;
                for md in modes.iter().filter(|md| md.m == m) {
                    let g = md.radial.eval(r);
                    a += g * md.phase.cos();
                    b -= g * md.phase.sin();
                }
                (a, b)
            }
            CoeffProvider::Sampled {
                radii, coeff_rows, ..
            } => {
                let col = (m - 1) as usize;
                interp_rows(radii, coeff_rows, r, col)
            }
        };
        let s = m as f64 * TWO_PI * t * r;
        let (sin, cos) = s.sin_cos();
        (a0 * cos - b0 * sin, a0 * sin + b0 * cos)
    }

    /// Circle mean g₀(r) of the datum (transport-invariant).
    fn radial_mean(&self, r: f64) -> f64 {
        match self {
            CoeffProvider::StepLike { pieces, .. } => {
                let k = pieces
                    .partition_point(|p| p.r_hi < r)
                    .min(pieces.len() - 1);
                pieces[k].mean
            }
            CoeffProvider::Modal { .. } => 0.0,
            CoeffProvider::Sampled { radii, means, .. } => {
                interp_scalar(radii, means, r)
            }
        }
    }

    /// ∫_B ρ / π = 2∫ g₀(r) r dr.
    fn global_mean(&self) -> f64 {
        match self {
            CoeffProvider::StepLike { global_mean, .. } => *global_mean,
            CoeffProvider::Modal { .. } => 0.0,
            CoeffProvider::Sampled { global_mean, .. } => *global_mean,
        }
    }

    fn has_radial_part(&self) -> bool {
        match self {
            CoeffProvider::StepLike { pieces, .. } => {
                pieces.iter().any(|p| p.mean.abs() > 1e-14)
            }
            CoeffProvider::Modal { .. } => false,
            CoeffProvider::Sampled { means, .. } => {
                means.iter().any(|m| m.abs() > 1e-12)
            }
        }
    }

    /// Modes with any nonzero coefficient, ascending.
    fn active_modes(&self) -> Vec<u32> {
        match self {
            CoeffProvider::StepLike { pieces, .. } => {
                let count = pieces.first().map_or(0, |p| p.coeffs.len());
                (1..=count as u32)
                    .filter(|&m| {
                        pieces.iter().any(|p| {
                            let (a, b) = p.coeffs[(m - 1) as usize];
                            a.abs() + b.abs() > 1e-14
                        })
                    })
                    .collect()
            }
            CoeffProvider::Modal { modes } => {
                let mut ms: Vec<u32> = modes.iter().map(|md| md.m).collect();
                ms.sort_unstable();
                ms.dedup();
                ms
            }
            CoeffProvider::Sampled { coeff_rows, .. } => {
                let count = coeff_rows.first().map_or(0, |r| r.len());
                (1..=count as u32)
                    .filter(|&m| {
                        coeff_rows.iter().any(|row| {
                            let (a, b) = row[(m - 1) as usize];
                            a.abs() + b.abs() > 1e-12
                        })
                    })
                    .collect()
            }
        }
    }
}

fn interp_rows(radii: &[f64], rows: &[Vec<(f64, f64)>], r: f64, col: usize) -> (f64, f64) {
    if r <= radii[0] {
        return rows[0][col];
    }
    if r >= *radii.last().unwrap() {
        return rows[rows.len() - 1][col];
    }
    let i = radii.partition_point(|&x| x < r);
    let s = (r - radii[i - 1]) / (radii[i] - radii[i - 1]);
    let (a0, b0) = rows[i - 1][col];
    let (a1, b1) = rows[i][col];
    (a0 * (1.0 - s) + a1 * s, b0 * (1.0 - s) + b1 * s)
}

fn interp_scalar(radii: &[f64], vals: &[f64], r: f64) -> f64 {
    if r <= radii[0] {
        return vals[0];
    }
    if r >= *radii.last().unwrap() {
        return vals[vals.len() - 1];
    }
    let i = radii.partition_point(|&x| x < r);
    let s = (r - radii[i - 1]) / (radii[i] - radii[i - 1]);
    vals[i - 1] * (1.0 - s) + vals[i] * s
}

/// Fourier coefficients (a_m, b_m), m = 1..=count, of the periodic
/// piecewise-linear function through (thetas, values); exact per segment.
fn piecewise_linear_fourier(thetas: &[f64], values: &[f64], count: usize) -> Vec<(f64, f64)> {
    let n = thetas.len();
    let mut out = vec![(0.0, 0.0); count];
    for (mi, item) in out.iter_mut().enumerate() {
        let m = (mi + 1) as f64;
        let mut a = 0.0;
        let mut b = 0.0;
        for k in 0..n {
            let t0 = thetas[k];
            let t1 = if k + 1 == n {
                thetas[0] + TWO_PI
            } else {
                thetas[k + 1]
            };
            let (v0, v1) = (values[k], values[(k + 1) % n]);
            let dt = t1 - t0;
            if dt <= 0.0 {
                continue;
            }
            let slope = (v1 - v0) / dt;
            // ∫ (v0 + slope(θ−t0)) cos(mθ) dθ and the sine analogue
            let (s0, c0) = (m * t0).sin_cos();
            let (s1, c1) = (m * t1).sin_cos();
            a += (v1 * s1 - v0 * s0) / m + slope * (c1 - c0) / (m * m);
            b += (v0 * c0 - v1 * c1) / m + slope * (s1 - s0) / (m * m);
        }
        *item = (a / PI, b / PI);
    }
    out
}

fn periodic_mean(thetas: &[f64], values: &[f64]) -> f64 {
    let n = thetas.len();
    let mut acc = 0.0;
    for k in 0..n {
        let t1 = if k + 1 == n {
            thetas[0] + TWO_PI
        } else {
            thetas[k + 1]
        };
        acc += 0.5 * (values[k] + values[(k + 1) % n]) * (t1 - thetas[k]);
    }
    acc / TWO_PI
}

// ---------------------------------------------------------------------------
// the radial solver

/// Graded mesh: nodes r_i = sin(πi/2n) for i = 1..n (so r_n = 1), plus the
/// control faces (midpoints; half-node at the inner end, the boundary at the
/// outer end).
fn graded_mesh(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (1..=n)
        .map(|i| (PI * i as f64 / (2.0 * n as f64)).sin())
        .collect();
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(0.5 * nodes[0]);
    for i in 1..n {
        faces.push(0.5 * (nodes[i - 1] + nodes[i]));
    }
    faces.push(1.0);
    (nodes, faces)
}

/// Finite-volume solve of one mode on n nodes. `coeff` returns the (cos,
/// sin) coefficient pair of ρ_m at a radius. Returns the mode solution and
/// its relative residual.
fn solve_mode_fv(
    m: u32,
    n: usize,
    coeff: impl Fn(f64) -> (f64, f64),
    with_mass: bool,
) -> (ModeSolution, f64) {
    let (nodes, faces) = graded_mesh(n);
    let m2 = (m as f64) * (m as f64);
    // conduction between node i−1 and i at face i (1..n−1); the inner pin
    // for m ≥ 1 couples node 0 to ξ(0) = 0 through face 0
    let mut cond = vec![0.0f64; n + 1];
    cond[0] = if m >= 1 { faces[0] / nodes[0] } else { 0.0 };
    for i in 1..n {
        cond[i] = faces[i] / (nodes[i] - nodes[i - 1]);
    }
    cond[n] = 0.0; // Neumann at r = 1
    let volume: Vec<f64> = (0..n)
        .map(|i| 0.5 * (faces[i + 1] * faces[i + 1] - faces[i] * faces[i]))
        .collect();
    let curv: Vec<f64> = (0..n)
        .map(|i| {
            if m == 0 {
                0.0
            } else {
                m2 * (faces[i + 1] / faces[i]).ln()
            }
        })
        .collect();
    let mut diag = vec![0.0f64; n];
    let mut lower = vec![0.0f64; n]; // lower[i] couples node i to i−1
    for i in 0..n {
        diag[i] = cond[i] + cond[i + 1] + curv[i];
        if with_mass {
            diag[i] += volume[i];
        }
        if i > 0 {
            lower[i] = -cond[i];
        }
    }
    let rhs: Vec<(f64, f64)> = (0..n).map(|i| coeff(nodes[i])).collect();
    let rhs_c: Vec<f64> = (0..n).map(|i| rhs[i].0 * volume[i]).collect();
    let rhs_s: Vec<f64> = (0..n).map(|i| rhs[i].1 * volume[i]).collect();
    let skip_c = rhs_c.iter().all(|v| v.abs() < 1e-300);
    let skip_s = rhs_s.iter().all(|v| v.abs() < 1e-300);
    let xi_c = if skip_c {
        vec![0.0; n]
    } else {
        thomas(&lower, &diag, &rhs_c)
    };
    let xi_s = if skip_s {
        vec![0.0; n]
    } else {
        thomas(&lower, &diag, &rhs_s)
    };

    let angular_weight = if m == 0 { TWO_PI } else { PI };
    let mut energy = 0.0;
    let mut pairing = 0.0;
    for (xi, rhs_v) in [(&xi_c, &rhs_c), (&xi_s, &rhs_s)] {
        let mut e = cond[0] * xi[0] * xi[0];
        for i in 1..n {
            let d = xi[i] - xi[i - 1];
            e += cond[i] * d * d;
        }
        for i in 0..n {
            e += curv[i] * xi[i] * xi[i];
            if with_mass {
                e += volume[i] * xi[i] * xi[i];
            }
        }
        let p: f64 = (0..n).map(|i| rhs_v[i] * xi[i]).sum();
        energy += angular_weight * e;
        pairing += angular_weight * p;
    }

    // normwise backward error per branch; scaling by ‖b‖ alone would be
    // misleading here because b carries tiny cell volumes while boundary
    // rows carry conductances ~n²
    let residual = {
        let mut worst = 0.0f64;
        for (xi, rhs_v) in [(&xi_c, &rhs_c), (&xi_s, &rhs_s)] {
            let b_inf = rhs_v.iter().fold(0.0f64, |mx, v| mx.max(v.abs()));
            if b_inf == 0.0 {
                continue;
            }
            let x_inf = xi.iter().fold(0.0f64, |mx, v| mx.max(v.abs()));
            let mut a_inf = 0.0f64;
            let mut local = 0.0f64;
            for i in 0..n {
                let mut ax = diag[i] * xi[i];
                let mut row = diag[i].abs();
                if i > 0 {
                    ax += lower[i] * xi[i - 1];
                    row += lower[i].abs();
                }
                if i + 1 < n {
                    ax += lower[i + 1] * xi[i + 1];
                    row += lower[i + 1].abs();
                }
                a_inf = a_inf.max(row);
                local = local.max((ax - rhs_v[i]).abs());
            }
            worst = worst.max(local / (a_inf * x_inf + b_inf));
        }
        worst
    };

    let stride = (n / STORE_CAP).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).chain(std::iter::once(n - 1)).collect();
    (
        ModeSolution {
            m,
            node_count: n,
            radii: idx.iter().map(|&i| nodes[i]).collect(),
            cosine: idx.iter().map(|&i| xi_c[i]).collect(),
            sine: idx.iter().map(|&i| xi_s[i]).collect(),
            energy,
            pairing,
        },
        residual,
    )
}

/// Symmetric tridiagonal solve (Thomas); `lower[i]` couples i to i−1 and by
/// symmetry also serves as the upper diagonal.
fn thomas(lower: &[f64], diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0f64; n]; // transformed upper
    let mut d = vec![0.0f64; n]; // transformed rhs
    c[0] = lower.get(1).copied().unwrap_or(0.0) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { lower[i + 1] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0f64; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// m = 0 by direct integration: r ξ′(r) = −G(r) with G(r) = ∫₀^r g₀ s ds,
/// valid when G(1) = 0 (global mean zero). The energy is 2π ∫ G²/r dr.
fn solve_m0_direct(provider: &CoeffProvider, base_resolution: usize) -> ModeSolution {
    let n = base_resolution.max(1024);
    let (nodes, _) = graded_mesh(n);
    // cumulative G at nodes by fine midpoint accumulation between nodes
    let mut g_at = vec![0.0f64; n];
    let mut acc = 0.0;
    let mut prev = 0.0;
    const SUB: usize = 8;
    for i in 0..n {
        let r = nodes[i];
        for k in 0..SUB {
            let s = prev + (r - prev) * (k as f64 + 0.5) / SUB as f64;
            acc += provider.radial_mean(s) * s * (r - prev) / SUB as f64;
        }
        g_at[i] = acc;
        prev = r;
    }
    // energy 2π ∫ G²/r dr, midpoint between nodes with interpolated G
    let mut energy = 0.0;
    let mut prev_r = 0.0;
    let mut prev_g = 0.0;
    for i in 0..n {
        let (r, g) = (nodes[i], g_at[i]);
        for k in 0..SUB {
            let f = (k as f64 + 0.5) / SUB as f64;
            let rm = prev_r + (r - prev_r) * f;
            let gm = prev_g + (g - prev_g) * f;
            if rm > 0.0 {
                energy += gm * gm / rm * (r - prev_r) / SUB as f64;
            }
        }
        prev_r = r;
        prev_g = g;
    }
    energy *= TWO_PI;
    // ξ(r) = −∫ G/s ds from 1 down, then recenter to zero disk mean
    let mut xi = vec![0.0f64; n];
    for i in (0..n - 1).rev() {
        let rm = 0.5 * (nodes[i] + nodes[i + 1]);
        let gm = 0.5 * (g_at[i] + g_at[i + 1]);
        xi[i] = xi[i + 1] + gm / rm * (nodes[i + 1] - nodes[i]);
    }
    let mut mass = 0.0;
    let mut area = 0.0;
    for i in 0..n {
        let w = if i == 0 { nodes[0] } else { nodes[i] - nodes[i - 1] };
        mass += xi[i] * nodes[i] * w;
        area += nodes[i] * w;
    }
    let shift = mass / area;
    for v in xi.iter_mut() {
        *v -= shift;
    }
    let stride = (n / STORE_CAP).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).chain(std::iter::once(n - 1)).collect();
    ModeSolution {
        m: 0,
        node_count: n,
        radii: idx.iter().map(|&i| nodes[i]).collect(),
        cosine: idx.iter().map(|&i| xi[i]).collect(),
        sine: vec![0.0; idx.len()],
        energy,
        pairing: energy, // equality by construction for the direct integral
    }
}
