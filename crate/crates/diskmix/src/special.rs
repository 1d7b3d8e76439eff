//! Bessel functions of the first kind, power-series evaluation.
//!
//! Orders and arguments used in this crate are small (m ≤ ~10, x ≤ ~30), well
//! inside the range where the alternating series is stable in f64.

/// J_m(x) by the ascending series Σ (−1)^k (x/2)^{m+2k} / (k! (m+k)!).
pub fn bessel_j(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let neg = x < 0.0;
    let x = x.abs();
    let half = 0.5 * x;
    // t_0 = (x/2)^m / m!
    let mut term = 1.0;
    for j in 1..=m {
        term *= half / j as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..=200 {
        term *= -q / (k as f64 * (m as f64 + k as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() + 1e-300 {
            break;
        }
    }
    // J_m(-x) = (-1)^m J_m(x)
    if neg && m % 2 == 1 {
        -sum
    } else {
        sum
    }
}

/// J_m'(x) via the recurrence (J_{m-1} − J_{m+1}) / 2; J_0' = −J_1.
pub fn bessel_j_derivative(m: u32, x: f64) -> f64 {
    if m == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun tabulated points
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(2, 2.0) - 0.352_834_028_615_638_1).abs() < 1e-14);
        assert!((bessel_j(0, 10.0) + 0.245_935_764_451_348_3).abs() < 1e-13);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for m in 0..4u32 {
            for &x in &[0.5, 1.7, 6.3] {
                let fd = (bessel_j(m, x + h) - bessel_j(m, x - h)) / (2.0 * h);
                assert!(
                    (bessel_j_derivative(m, x) - fd).abs() < 1e-8,
                    "m={m} x={x}"
                );
            }
        }
    }

    #[test]
    fn neumann_radial_roots_vanish() {
        // first radial derivative roots used by the solver oracle
        for (m, k) in [(1, 1.841_183_781_340_659_3), (2, 3.054_236_928_227_140_3)] {
            assert!(bessel_j_derivative(m, k).abs() < 1e-14, "m={m}");
        }
    }
}
