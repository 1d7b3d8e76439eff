//! Report assembly and deterministic emission.
//!
//! `report.csv` is long-format: one row per (time, accuracy) pair with the
//! geometric bracket for that accuracy and the accuracy-independent meters
//! repeated. `slopes.csv` holds the least-squares decay fits. `plot.gp` is a
//! self-contained gnuplot script drawing the decay curves against reference
//! slopes. Identical reports serialize to identical bytes.

use super::HarnessError;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Geometric bracket for one accuracy.
#[derive(Debug, Clone, Copy)]
pub struct KappaBracket {
    pub kappa: f64,
    /// Largest tested radius that failed below the bracket; 0 when all passed.
    pub eps_lower: f64,
    /// Smallest tested radius that passed; +∞ when none did.
    pub eps_upper: f64,
}

/// One time sample: brackets per accuracy plus the scalar meters.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub t: f64,
    pub brackets: Vec<KappaBracket>,
    pub hminus1: f64,
    pub max_tile_avg_m4: f64,
    pub max_tile_avg_m6: f64,
}

/// Log-log least-squares fit of one decay series.
#[derive(Debug, Clone)]
pub struct SlopeRecord {
    pub series: String,
    /// The accuracy the series belongs to, when it has one.
    pub kappa: Option<f64>,
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct MixingReport {
    pub experiment_id: String,
    /// Sorted by t ascending.
    pub rows: Vec<ReportRow>,
    pub slopes: Vec<SlopeRecord>,
    /// Role-named empirical constants measured during the run.
    pub constants: Vec<(String, f64)>,
}

impl MixingReport {
    /// (t, ε_upper) series for the bracket at the given accuracy.
    pub fn geometric_series(&self, kappa: f64) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|row| {
                row.brackets
                    .iter()
                    .find(|b| (b.kappa - kappa).abs() <= 1e-12)
                    .map(|b| (row.t, b.eps_upper))
            })
            .collect()
    }

    pub fn functional_series(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|row| (row.t, row.hminus1)).collect()
    }

    pub fn tile_series(&self, level: u32) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .map(|row| {
                let v = match level {
                    4 => row.max_tile_avg_m4,
                    6 => row.max_tile_avg_m6,
                    _ => panic!("report tracks tile levels 4 and 6, asked for {level}"),
                };
                (row.t, v)
            })
            .collect()
    }

    pub fn slope(&self, series: &str) -> Option<&SlopeRecord> {
        self.slopes.iter().find(|s| s.series == series)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// One CSV value: fixed-precision scientific notation, non-finite spelled out.
fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.12e}")
    }
}

fn validate_row(row: &ReportRow) {
    assert!(!row.brackets.is_empty(), "report row without brackets");
    for pair in row.brackets.windows(2) {
        assert!(
            pair[1].kappa > pair[0].kappa,
            "brackets must be kappa-ascending"
        );
        // a looser accuracy never needs a larger ball
        assert!(
            pair[1].eps_upper <= pair[0].eps_upper * (1.0 + 1e-9)
                || (pair[0].eps_upper.is_infinite() && pair[1].eps_upper.is_infinite()),
            "eps_upper must be nonincreasing in kappa: t={} {} -> {}",
            row.t,
            pair[0].eps_upper,
            pair[1].eps_upper
        );
    }
}

pub const REPORT_HEADER: &str =
    "t,kappa,eps_lower,eps_upper,hminus1,max_tile_avg_M4,max_tile_avg_M6";

fn render_report_csv(report: &MixingReport) -> String {
    let mut buf = String::new();
    buf.push_str(REPORT_HEADER);
    buf.push('\n');
    for row in &report.rows {
        for b in &row.brackets {
            let _ = writeln!(
                buf,
                "{},{},{},{},{},{},{}",
                fmt_value(row.t),
                fmt_value(b.kappa),
                fmt_value(b.eps_lower),
                fmt_value(b.eps_upper),
                fmt_value(row.hminus1),
                fmt_value(row.max_tile_avg_m4),
                fmt_value(row.max_tile_avg_m6),
            );
        }
    }
    buf
}

fn render_constants_csv(report: &MixingReport) -> String {
    let mut buf = String::from("name,value\n");
    for (name, value) in &report.constants {
        let _ = writeln!(buf, "{},{}", name, fmt_value(*value));
    }
    buf
}

fn render_slopes_csv(report: &MixingReport) -> String {
    let mut buf = String::from("series,kappa,window_lo,window_hi,slope,intercept,residual\n");
    for s in &report.slopes {
        let kappa = s.kappa.map(fmt_value).unwrap_or_default();
        let _ = writeln!(
            buf,
            "{},{},{},{},{},{},{}",
            s.series,
            kappa,
            fmt_value(s.window.0),
            fmt_value(s.window.1),
            fmt_value(s.slope),
            fmt_value(s.intercept),
            fmt_value(s.residual),
        );
    }
    buf
}

fn render_plot_script(report: &MixingReport) -> String {
    let kappas: Vec<f64> = report.rows[0].brackets.iter().map(|b| b.kappa).collect();
    // anchor the reference curves on the first finite data points
    let anchor_geo = report
        .rows
        .iter()
        .flat_map(|r| r.brackets.iter().map(|b| (r.t, b.eps_upper)))
        .find(|(_, e)| e.is_finite() && *e > 0.0)
        .map(|(t, e)| e * t);
    let anchor_fun = report
        .rows
        .iter()
        .map(|r| (r.t, r.hminus1))
        .find(|(_, h)| *h > 0.0 && h.is_finite())
        .map(|(t, h)| h * t.sqrt());

    let mut buf = String::new();
    let _ = writeln!(buf, "# decay curves for run {}", report.experiment_id);
    buf.push_str(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set key bottom left\n\
         set logscale xy\n\
         set xlabel 't'\n\
         set ylabel 'scale'\n\
         set grid\n\
         set term pngcairo size 960,680\n\
         set output 'decay.png'\n",
    );
    let mut items: Vec<String> = Vec::new();
    for &k in &kappas {
        let lit = fmt_value(k);
        items.push(format!(
            "'report.csv' using 1:(column('kappa') == {lit} ? column('eps_upper') : 1/0) \
             with linespoints title 'geometric ({lit})'"
        ));
    }
    let first = fmt_value(kappas[0]);
    items.push(format!(
        "'report.csv' using 1:(column('kappa') == {first} ? column('hminus1') : 1/0) \
         with linespoints title 'functional'"
    ));
    if let Some(c1) = anchor_geo {
        items.push(format!("{} / x with lines dashtype 2 title 'slope -1'", fmt_value(c1)));
    }
    if let Some(c2) = anchor_fun {
        items.push(format!(
            "{} / sqrt(x) with lines dashtype 3 title 'slope -1/2'",
            fmt_value(c2)
        ));
    }
    buf.push_str("plot \\\n  ");
    buf.push_str(&items.join(", \\\n  "));
    buf.push('\n');
    buf
}

/// Writes `report.csv`, `slopes.csv` and `plot.gp` into `out_dir`, creating
/// it if needed. Refuses an empty report before touching the filesystem.
pub fn emit_report(report: &MixingReport, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if report.rows.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    for pair in report.rows.windows(2) {
        assert!(pair[1].t > pair[0].t, "report rows must be t-ascending");
    }
    for row in &report.rows {
        validate_row(row);
    }
    fs::create_dir_all(out_dir)?;
    let files = [
        ("report.csv", render_report_csv(report)),
        ("slopes.csv", render_slopes_csv(report)),
        ("constants.csv", render_constants_csv(report)),
        ("plot.gp", render_plot_script(report)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = out_dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> MixingReport {
        let row = |t: f64, scale: f64| ReportRow {
            t,
            brackets: vec![
                KappaBracket { kappa: 0.2, eps_lower: scale, eps_upper: 2.0 * scale },
                KappaBracket { kappa: 0.4, eps_lower: 0.5 * scale, eps_upper: scale },
            ],
            hminus1: scale.sqrt(),
            max_tile_avg_m4: scale * 0.1,
            max_tile_avg_m6: scale * 0.05,
        };
        MixingReport {
            experiment_id: "sample".into(),
            rows: vec![row(8.0, 0.4), row(16.0, 0.2), row(32.0, 0.1)],
            slopes: vec![SlopeRecord {
                series: "geometric_eps_upper".into(),
                kappa: Some(0.2),
                window: (8.0, 32.0),
                slope: -1.0,
                intercept: 1.7,
                residual: 0.01,
            }],
            constants: vec![("tile_diameter_constant".into(), 6.36)],
        }
    }

    #[test]
    fn emits_expected_files_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&sample_report(), dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        let csv = fs::read_to_string(&files[0]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), REPORT_HEADER);
        // 3 rows × 2 accuracies
        assert_eq!(lines.count(), 6);
        let slopes = fs::read_to_string(&files[1]).unwrap();
        assert!(slopes.starts_with("series,kappa,window_lo,window_hi,slope,intercept,residual"));
        let constants = fs::read_to_string(&files[2]).unwrap();
        assert!(constants.starts_with("name,value"));
        assert!(constants.contains("tile_diameter_constant,"));
        let plot = fs::read_to_string(&files[3]).unwrap();
        assert!(plot.contains("set key autotitle columnhead"));
        assert!(plot.contains("slope -1"));
        assert!(plot.contains("slope -1/2"));
    }

    #[test]
    fn empty_report_errors_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sub");
        let report = MixingReport {
            experiment_id: "empty".into(),
            rows: vec![],
            slopes: vec![],
            constants: vec![],
        };
        assert!(matches!(
            emit_report(&report, &out),
            Err(HarnessError::EmptyReport)
        ));
        assert!(!out.exists());
    }

    #[test]
    fn emission_is_deterministic() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let report = sample_report();
        emit_report(&report, dir_a.path()).unwrap();
        emit_report(&report, dir_b.path()).unwrap();
        for name in ["report.csv", "slopes.csv", "plot.gp"] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn infinities_render_as_markers() {
        let mut report = sample_report();
        report.rows[0].brackets[0].eps_upper = f64::INFINITY;
        report.rows[0].brackets[1].eps_upper = f64::INFINITY;
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&report, dir.path()).unwrap();
        let csv = fs::read_to_string(&files[0]).unwrap();
        assert!(csv.contains(",inf,"));
    }

    #[test]
    #[should_panic(expected = "nonincreasing in kappa")]
    fn kappa_monotonicity_is_enforced() {
        let mut report = sample_report();
        // looser accuracy reporting a larger ball is a bug upstream
        report.rows[1].brackets[1].eps_upper = 10.0;
        let dir = tempfile::tempdir().unwrap();
        let _ = emit_report(&report, dir.path());
    }

    #[test]
    fn series_extraction_matches_rows() {
        let report = sample_report();
        let geo = report.geometric_series(0.4);
        assert_eq!(geo.len(), 3);
        assert_eq!(geo[0], (8.0, 0.4));
        let fun = report.functional_series();
        assert_eq!(fun[2].0, 32.0);
        assert!(report.geometric_series(0.9).is_empty());
    }
}
