//! Built-in experiment registry, the sweep runner, and result checks.
//!
//! Each named experiment reproduces one decay or counterexample claim end to
//! end: build the datum, sweep the dyadic time grid, evaluate both meters
//! plus tile diagnostics at every time, fit slopes, persist the report. The
//! checks in [`evaluate_checks`] compare fitted slopes against the expected
//! windows, or verify marker behavior for the counterexample runs.

use super::config::{DatumSpec, ExperimentConfig, TimeGrid};
use super::report::{KappaBracket, MixingReport, ReportRow, SlopeRecord};
use super::HarnessError;
use crate::approx::approximation_error;
use crate::datum::{Mode, RadialProfile};
use crate::flow::FieldSnapshot;
use crate::metrics::functional::h_minus_one_norm;
use crate::metrics::geometric::{default_epsilon_grid, geometric_scale};
use crate::metrics::pairing::weak_pairing;
use crate::metrics::rates::fit_decay_rate;
use crate::testfns::inner_bump;
use crate::tiling::{max_abs_tile_average, tile_diameter_constant};
use std::path::PathBuf;

const TILE_ORDER: usize = 8;

pub fn builtin_ids() -> &'static [&'static str] {
    &["E1", "E2N1", "E2N2", "E2N3", "E3", "E4A", "E4B", "E5", "E6"]
}

pub fn describe(id: &str) -> Option<&'static str> {
    Some(match id {
        "E1" => "half-disk datum: geometric decay near 1/t, functional near 1/sqrt(t)",
        "E2N1" => "two-annulus step datum: late-time geometric rate",
        "E2N2" => "four-annulus step datum: late-time geometric rate",
        "E2N3" => "eight-annulus step datum: late-time geometric rate",
        "E3" => "continuous single-mode datum: geometric decay near 1/t",
        "E4A" => "Hölder cusp datum (alpha 0.5): functional decay, approximation diagnostic",
        "E4B" => "Lipschitz cusp datum (alpha 1.0): functional decay, approximation diagnostic",
        "E5" => "stationary annulus counterexample: both meters constant in t",
        "E6" => "premixed-core pathology: decay at its accuracy, unmixed marker at half",
        _ => return None,
    })
}

/// Built-in configuration for a registry id.
pub fn builtin(id: &str) -> Option<ExperimentConfig> {
    let grid = |t_min: f64, points: usize| TimeGrid {
        t_min,
        t_max: t_min * 2f64.powi(points as i32 - 1),
        points,
    };
    let base = |datum: DatumSpec| ExperimentConfig {
        experiment_id: id.to_string(),
        datum,
        kappas: vec![0.2],
        time_grid: grid(8.0, 8),
        raster_resolution: 512,
        radial_resolution: 256,
        mode_count: 32,
        max_epsilon: 2.0,
        output_dir: PathBuf::from("runs").join(id),
        seed: 7,
    };
    let config = match id {
        "E1" => {
            let mut c = base(DatumSpec::HalfDisk);
            c.raster_resolution = 1024;
            c.mode_count = 64;
            c
        }
        "E2N1" | "E2N2" | "E2N3" => {
            let level = id.as_bytes()[3] - b'0';
            let mut c = base(DatumSpec::AlternatingWaves { level: level as u32 });
            c.raster_resolution = 1024;
            c.mode_count = 64;
            // rows past t = 128 stay in the report as a visible record of
            // where the raster stops resolving the sweep; the checks below
            // fit only the resolved regime
            c.time_grid = grid(4.0, 8);
            c
        }
        "E3" => {
            let mode = Mode {
                m: 1,
                radial: RadialProfile::Poly { coeffs: vec![0.0, 1.0] },
                phase: 0.0,
            };
            let mut c = base(DatumSpec::Modal { modes: vec![mode] });
            // smooth data never alias, but the ε grid floor 8/raster
            // clamps the series once the true scale falls below it
            // (near t = 100 here); later rows stay as floor diagnostics
            c.raster_resolution = 1024;
            c.time_grid = grid(4.0, 7);
            c
        }
        "E4A" => base(DatumSpec::HolderCusp { alpha: 0.5 }),
        "E4B" => base(DatumSpec::HolderCusp { alpha: 1.0 }),
        "E5" => {
            let mut c = base(DatumSpec::StationaryAnnulus);
            c.kappas = vec![0.5];
            c.time_grid = grid(1.0, 9);
            c
        }
        "E6" => {
            let mut c = base(DatumSpec::PartialMixing { kappa: 0.3 });
            c.kappas = vec![0.15, 0.3];
            c.time_grid = grid(1.0, 11);
            // the tested radii deliberately stop below the premixed core:
            // wider balls eventually pass by dilution over the zero-extended
            // plane, which would mask the genuine small-scale obstruction
            c.max_epsilon = 0.3;
            c
        }
        _ => return None,
    };
    Some(config)
}

/// Runs the full sweep and writes the report files into the output dir.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MixingReport, HarnessError> {
    config.validate()?;
    let datum = config.datum.build()?;
    let times = config.time_grid.times();
    let eps_grid = default_epsilon_grid(config.raster_resolution, config.max_epsilon);

    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let snapshot = FieldSnapshot::new(&datum, t);
        let mut brackets = Vec::with_capacity(config.kappas.len());
        for &kappa in &config.kappas {
            let scale = geometric_scale(&snapshot, kappa, config.raster_resolution, &eps_grid)?;
            brackets.push(KappaBracket {
                kappa,
                eps_lower: scale.epsilon_lower,
                eps_upper: scale.epsilon_upper,
            });
        }
        let solve = h_minus_one_norm(&snapshot, config.radial_resolution, config.mode_count)?;
        log::info!(
            "{} t={t}: eps_upper={:?} hminus1={:.6e}",
            config.experiment_id,
            brackets.iter().map(|b| b.eps_upper).collect::<Vec<_>>(),
            solve.norm_value
        );
        rows.push(ReportRow {
            t,
            brackets,
            hminus1: solve.norm_value,
            max_tile_avg_m4: max_abs_tile_average(&snapshot, 4, TILE_ORDER),
            max_tile_avg_m6: max_abs_tile_average(&snapshot, 6, TILE_ORDER),
        });
    }

    let slopes = fit_report_slopes(config, &rows);
    let constants = measure_constants(config, &datum, &rows);
    let report = MixingReport {
        experiment_id: config.experiment_id.clone(),
        rows,
        slopes,
        constants,
    };
    super::report::emit_report(&report, &config.output_dir)?;
    Ok(report)
}

pub fn geometric_series_name(kappa: f64) -> String {
    format!("geometric_eps_upper_k{kappa:.3}")
}

pub const FUNCTIONAL_SERIES: &str = "functional_hminus1";

/// Keeps the finite positive part of a series; fits need ≥ 4 such points.
fn finite_part(series: &[(f64, f64)]) -> Vec<(f64, f64)> {
    series
        .iter()
        .copied()
        .filter(|(_, v)| v.is_finite() && *v > 0.0)
        .collect()
}

fn fit_series(series: &[(f64, f64)], name: &str, kappa: Option<f64>) -> Option<SlopeRecord> {
    let finite = finite_part(series);
    if finite.len() < 4 {
        return None;
    }
    let window = (finite[0].0, finite[finite.len() - 1].0);
    let fit = fit_decay_rate(&finite, window).ok()?;
    Some(SlopeRecord {
        series: name.to_string(),
        kappa,
        window,
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
    })
}

fn bracket_series(rows: &[ReportRow], kappa: f64) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|row| {
            row.brackets
                .iter()
                .find(|b| (b.kappa - kappa).abs() <= 1e-12)
                .map(|b| (row.t, b.eps_upper))
        })
        .collect()
}

/// Earliest grid time whose tail fit already sits inside the slope window.
/// A diagnostic, not a gate: it reports when a series enters its asymptotic
/// regime instead of asserting that it has by some fixed time.
fn window_entry(series: &[(f64, f64)], window: (f64, f64)) -> Option<f64> {
    let finite = finite_part(series);
    for start in 0..finite.len() {
        let tail = &finite[start..];
        if tail.len() < 4 {
            break;
        }
        let span = (tail[0].0, tail[tail.len() - 1].0);
        if let Ok(fit) = fit_decay_rate(tail, span) {
            if fit.slope >= window.0 && fit.slope <= window.1 {
                return Some(tail[0].0);
            }
        }
    }
    None
}

fn fit_report_slopes(config: &ExperimentConfig, rows: &[ReportRow]) -> Vec<SlopeRecord> {
    let mut slopes = Vec::new();
    for &kappa in &config.kappas {
        let series = bracket_series(rows, kappa);
        if let Some(rec) = fit_series(&series, &geometric_series_name(kappa), Some(kappa)) {
            slopes.push(rec);
        }
    }
    let functional: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.hminus1)).collect();
    if let Some(rec) = fit_series(&functional, FUNCTIONAL_SERIES, None) {
        slopes.push(rec);
    }
    for (level, pick) in [(4u32, 0usize), (6u32, 1usize)] {
        let series: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.t, if pick == 0 { r.max_tile_avg_m4 } else { r.max_tile_avg_m6 }))
            .collect();
        if let Some(rec) = fit_series(&series, &format!("tile_avg_M{level}"), None) {
            slopes.push(rec);
        }
    }
    slopes
}

/// Empirical prefactors, named by the inequality they instantiate. Each is a
/// max over the grid, so it is the worst observed constant.
fn measure_constants(
    config: &ExperimentConfig,
    datum: &crate::datum::ScalarDatum,
    rows: &[ReportRow],
) -> Vec<(String, f64)> {
    let sup = datum.sup_norm();
    let mut constants = Vec::new();
    constants.push(("tile_diameter_constant_M4".to_string(), tile_diameter_constant(4)));
    constants.push(("tile_diameter_constant_M6".to_string(), tile_diameter_constant(6)));
    for (level, name) in [(4u32, "tile_decay_constant_M4"), (6u32, "tile_decay_constant_M6")] {
        let c = rows
            .iter()
            .map(|r| {
                let avg = if level == 4 { r.max_tile_avg_m4 } else { r.max_tile_avg_m6 };
                r.t * avg * (1u64 << level) as f64
            })
            .fold(0.0f64, f64::max);
        constants.push((name.to_string(), c));
    }
    for &kappa in &config.kappas {
        let c = rows
            .iter()
            .filter_map(|r| {
                r.brackets
                    .iter()
                    .find(|b| (b.kappa - kappa).abs() <= 1e-12)
                    .map(|b| (r.t, b.eps_upper))
            })
            .filter(|(_, e)| e.is_finite())
            .map(|(t, e)| kappa * kappa * t * e)
            .fold(0.0f64, f64::max);
        if c > 0.0 {
            constants.push((format!("geometric_rate_constant_k{kappa:.3}"), c));
        }
    }
    let c_fun = rows
        .iter()
        .map(|r| r.hminus1 * r.t.sqrt())
        .fold(0.0f64, f64::max);
    constants.push(("functional_rate_constant".to_string(), c_fun));
    // when each decay series first settles into its expected slope window
    for &kappa in &config.kappas {
        if let Some(t0) = window_entry(&bracket_series(rows, kappa), (-1.25, -0.75)) {
            constants.push((format!("geometric_window_entry_t_k{kappa:.3}"), t0));
        }
    }
    let functional: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.hminus1)).collect();
    if let Some(t0) = window_entry(&functional, (-0.65, -0.40)) {
        constants.push(("functional_window_entry_t".to_string(), t0));
    }
    if sup > 0.0 {
        // norm-vs-tile constant, recorded only where the tile hypothesis holds
        let hyp = 2.0 * sup / 16.0;
        let c = rows
            .iter()
            .filter(|r| r.max_tile_avg_m4 <= hyp)
            .map(|r| r.hminus1 * 16.0 / sup)
            .fold(0.0f64, f64::max);
        if c > 0.0 {
            constants.push(("functional_tile_constant_M4".to_string(), c));
        }
    }
    let bump = inner_bump();
    let c_pair = [rows.first(), rows.last()]
        .into_iter()
        .flatten()
        .map(|r| {
            let snapshot = FieldSnapshot::new(datum, r.t);
            weak_pairing(&snapshot, &bump).abs() * r.t.sqrt()
        })
        .fold(0.0f64, f64::max);
    constants.push(("pairing_rate_constant".to_string(), c_pair));
    constants
}

/// One named pass/fail verdict about a finished run.
#[derive(Debug, Clone)]
pub struct ExperimentCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn slope_window_check(
    name: &str,
    series: &[(f64, f64)],
    window: (f64, f64),
    expected: (f64, f64),
) -> ExperimentCheck {
    let in_window: Vec<(f64, f64)> = finite_part(series)
        .into_iter()
        .filter(|(t, _)| *t >= window.0 * (1.0 - 1e-9) && *t <= window.1 * (1.0 + 1e-9))
        .collect();
    match fit_decay_rate(&in_window, window) {
        Ok(fit) => {
            let passed = fit.slope >= expected.0 && fit.slope <= expected.1;
            ExperimentCheck {
                name: name.to_string(),
                passed,
                detail: format!(
                    "slope {:.4} over t in [{}, {}], expected [{}, {}], residual {:.3e}",
                    fit.slope, window.0, window.1, expected.0, expected.1, fit.residual
                ),
            }
        }
        Err(e) => ExperimentCheck {
            name: name.to_string(),
            passed: false,
            detail: format!("fit failed: {e}"),
        },
    }
}

/// Registry-specific verdicts for a finished run. Unknown ids get none.
pub fn evaluate_checks(config: &ExperimentConfig, report: &MixingReport) -> Vec<ExperimentCheck> {
    let mut checks = Vec::new();
    match config.experiment_id.as_str() {
        "E1" => {
            checks.push(slope_window_check(
                "geometric decay window",
                &report.geometric_series(0.2),
                (8.0, 256.0),
                (-1.25, -0.80),
            ));
            checks.push(slope_window_check(
                "functional decay window",
                &report.functional_series(),
                (16.0, 1024.0),
                (-0.65, -0.40),
            ));
        }
        "E2N1" | "E2N2" | "E2N3" => {
            let level = (config.experiment_id.as_bytes()[3] - b'0') as i32;
            // onset doubles with the refinement level: finer data start
            // closer to mixed and settle into the decay one octave later
            // per level. Fits stop at t = 128: past that, stripes of width
            // 1/t are under 8 raster cells and the sweep aliases.
            let window_lo = 4.0 * 2f64.powi(level - 1);
            checks.push(slope_window_check(
                "late-time geometric decay",
                &report.geometric_series(0.2),
                (window_lo, 128.0),
                (-1.6, -0.5),
            ));
        }
        "E3" => {
            checks.push(slope_window_check(
                "geometric decay window",
                &report.geometric_series(0.2),
                (4.0, 64.0),
                (-1.25, -0.75),
            ));
        }
        "E4A" | "E4B" => {
            let alpha = if config.experiment_id == "E4A" { 0.5 } else { 1.0 };
            checks.push(approximation_rate_check(config, alpha));
            if let Some(rec) = report.slope(FUNCTIONAL_SERIES) {
                checks.push(ExperimentCheck {
                    name: "functional decay recorded".into(),
                    passed: rec.slope < 0.0,
                    detail: format!(
                        "slope {:.4}; asymptotic prediction -{:.4} enters only past desk scale",
                        rec.slope,
                        alpha / (alpha + 4.0)
                    ),
                });
            }
        }
        "E5" => {
            checks.push(constancy_check(report));
            checks.push(pairing_floor_check(config, report, 0.2));
        }
        "E6" => {
            checks.push(marker_check(report, 0.15));
            checks.push(decay_detected_check(report, 0.3));
        }
        _ => {}
    }
    checks
}

/// Sup-norm approximation error must drop like 2^{-alpha·level}.
fn approximation_rate_check(config: &ExperimentConfig, alpha: f64) -> ExperimentCheck {
    let datum = match config.datum.build() {
        Ok(d) => d,
        Err(e) => {
            return ExperimentCheck {
                name: "approximation rate".into(),
                passed: false,
                detail: format!("datum failed to build: {e}"),
            }
        }
    };
    let series: Vec<(f64, f64)> = (2..=6)
        .map(|level| {
            let err = approximation_error(&datum, level);
            ((1u64 << level) as f64, err.sup)
        })
        .collect();
    match fit_decay_rate(&series, (series[0].0, series[4].0)) {
        Ok(fit) => {
            let bound = -alpha + 0.2;
            ExperimentCheck {
                name: "approximation rate".into(),
                passed: fit.slope <= bound,
                detail: format!("sup-error slope {:.4} vs required ≤ {bound:.2}", fit.slope),
            }
        }
        Err(e) => ExperimentCheck {
            name: "approximation rate".into(),
            passed: false,
            detail: format!("fit failed: {e}"),
        },
    }
}

/// Every meter column identical across rows (stationary data).
fn constancy_check(report: &MixingReport) -> ExperimentCheck {
    let tol = 1e-10;
    let mut worst = 0.0f64;
    let first = &report.rows[0];
    for row in &report.rows[1..] {
        for (a, b) in first.brackets.iter().zip(&row.brackets) {
            let spread = if a.eps_upper.is_infinite() && b.eps_upper.is_infinite() {
                0.0
            } else {
                (a.eps_upper - b.eps_upper).abs() / a.eps_upper.abs().max(1e-300)
            };
            worst = worst.max(spread);
        }
        worst = worst.max((first.hminus1 - row.hminus1).abs() / first.hminus1.abs().max(1e-300));
    }
    ExperimentCheck {
        name: "meters constant in t".into(),
        passed: worst <= tol,
        detail: format!("worst relative spread {worst:.3e} (tolerance {tol:.0e})"),
    }
}

/// The pairing against the interior bump must stay bounded away from zero.
fn pairing_floor_check(config: &ExperimentConfig, report: &MixingReport, floor: f64) -> ExperimentCheck {
    let datum = match config.datum.build() {
        Ok(d) => d,
        Err(e) => {
            return ExperimentCheck {
                name: "pairing floor".into(),
                passed: false,
                detail: format!("datum failed to build: {e}"),
            }
        }
    };
    let bump = inner_bump();
    let ts = [report.rows[0].t, report.rows[report.rows.len() - 1].t];
    let values: Vec<f64> = ts
        .iter()
        .map(|&t| weak_pairing(&FieldSnapshot::new(&datum, t), &bump))
        .collect();
    let passed = values.iter().all(|p| p.abs() >= floor);
    ExperimentCheck {
        name: "pairing floor".into(),
        passed,
        detail: format!(
            "pairing {:.4} at t={} and {:.4} at t={}, floor {floor}",
            values[0], ts[0], values[1], ts[1]
        ),
    }
}

/// All rows at this accuracy must report the unmixed marker.
fn marker_check(report: &MixingReport, kappa: f64) -> ExperimentCheck {
    let series = report.geometric_series(kappa);
    let passed = !series.is_empty() && series.iter().all(|(_, e)| e.is_infinite());
    let finite = series.iter().filter(|(_, e)| e.is_finite()).count();
    ExperimentCheck {
        name: format!("unmixed marker at kappa {kappa}"),
        passed,
        detail: if passed {
            format!("all {} rows report the marker", series.len())
        } else {
            format!("{finite} of {} rows came back finite", series.len())
        },
    }
}

/// The series at this accuracy must come down substantially once finite.
fn decay_detected_check(report: &MixingReport, kappa: f64) -> ExperimentCheck {
    let finite = finite_part(&report.geometric_series(kappa));
    let name = format!("decay detected at kappa {kappa}");
    if finite.len() < 4 {
        return ExperimentCheck {
            name,
            passed: false,
            detail: format!("only {} finite rows", finite.len()),
        };
    }
    let (first, last) = (finite[0].1, finite[finite.len() - 1].1);
    let passed = last <= first / 2.0;
    ExperimentCheck {
        name,
        passed,
        detail: format!(
            "scale {first:.4} at t={} down to {last:.4} at t={}",
            finite[0].0,
            finite[finite.len() - 1].0
        ),
    }
}

/// Pairwise slope agreement across runs of the same family.
pub fn rate_independence(slopes: &[f64], tolerance: f64) -> bool {
    slopes
        .iter()
        .enumerate()
        .all(|(i, a)| slopes[i + 1..].iter().all(|b| (a - b).abs() <= tolerance))
}
