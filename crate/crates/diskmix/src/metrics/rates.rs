//! Log-log slope fitting for decay series.

use super::MetricError;

/// Least-squares line through (log t, log value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    /// Natural-log intercept: value ≈ e^intercept · t^slope.
    pub intercept: f64,
    /// RMS residual of log(value) around the fitted line.
    pub residual: f64,
}

/// Fits log(value) against log(t) over the points with t inside the
/// inclusive window. The series must be strictly increasing in t with
/// positive values; at least 4 points must fall in the window.
pub fn fit_decay_rate(
    series: &[(f64, f64)],
    window: (f64, f64),
) -> Result<SlopeFit, MetricError> {
    for pair in series.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(MetricError::TimesNotIncreasing);
        }
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, _)| t >= window.0 && t <= window.1)
        .copied()
        .collect();
    if pts.len() < 4 {
        return Err(MetricError::TooFewPoints {
            given: pts.len(),
            minimum: 4,
        });
    }
    for &(t, v) in &pts {
        if !(v > 0.0) || !(t > 0.0) {
            return Err(MetricError::NonpositiveValue(v.min(t)));
        }
    }
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, v) in &pts {
        let (x, y) = (t.ln(), v.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for &(t, v) in &pts {
        let e = v.ln() - (intercept + slope * t.ln());
        ss += e * e;
    }
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&t| (t, f(t)))
            .collect()
    }

    #[test]
    fn exact_inverse_power() {
        let fit = fit_decay_rate(&series(|t| 1.0 / t), (1.0, 32.0)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn scaled_square_root() {
        let fit = fit_decay_rate(&series(|t| 7.0 / t.sqrt()), (1.0, 32.0)).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 7.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let fit = fit_decay_rate(&series(|_| 3.0), (1.0, 32.0)).unwrap();
        assert!(fit.slope.abs() < 1e-13);
    }

    #[test]
    fn window_restricts_the_fit() {
        // two regimes; the window picks out the second
        let mut s = Vec::new();
        for &t in &[1.0, 2.0, 4.0] {
            s.push((t, 5.0));
        }
        for &t in &[8.0, 16.0, 32.0, 64.0, 128.0] {
            s.push((t, 40.0 / t));
        }
        let fit = fit_decay_rate(&s, (8.0, 128.0)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let short = vec![(1.0, 1.0), (2.0, 0.5), (4.0, 0.25)];
        assert!(matches!(
            fit_decay_rate(&short, (1.0, 4.0)),
            Err(MetricError::TooFewPoints { .. })
        ));
        let zeroed = vec![(1.0, 1.0), (2.0, 0.0), (4.0, 0.25), (8.0, 0.1)];
        assert!(matches!(
            fit_decay_rate(&zeroed, (1.0, 8.0)),
            Err(MetricError::NonpositiveValue(_))
        ));
        let unsorted = vec![(1.0, 1.0), (4.0, 0.5), (2.0, 0.25), (8.0, 0.1)];
        assert!(matches!(
            fit_decay_rate(&unsorted, (1.0, 8.0)),
            Err(MetricError::TimesNotIncreasing)
        ));
    }
}
