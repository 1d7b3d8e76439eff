//! Gauss–Legendre quadrature with a process-wide rule cache.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Nodes and weights on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Computes the n-point rule by Newton iteration on the Legendre
    /// recurrence. Exact for polynomials of degree ≤ 2n−1.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "empty quadrature rule");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for k in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (_, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// (weight, node) pairs mapped affinely to [a, b]; weights carry the
    /// Jacobian so they sum to b − a.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (w * half, mid + half * x))
    }

    /// ∫_a^b f, mapped affinely from the reference interval.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Evaluates (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    // derivative from P_n and P_{n-1}; roots lie strictly inside (-1, 1)
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Cached n-point rule.
pub fn rule(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().unwrap().get(&n) {
        return Arc::clone(r);
    }
    let fresh = Arc::new(GaussRule::new(n));
    cache
        .write()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&fresh))
        .clone()
}

/// ∫_a^b f with the cached n-point rule.
pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
    rule(n).integrate(a, b, f)
}

/// Integrates over each consecutive pair of sorted breakpoints and sums in
/// order. Degenerate panels contribute zero.
pub fn integrate_split<F: FnMut(f64) -> f64>(breaks: &[f64], n: usize, mut f: F) -> f64 {
    let r = rule(n);
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            acc += r.integrate(w[0], w[1], &mut f);
        }
    }
    acc
}

/// Splits [a, b] into `panels` equal pieces; used where the integrand
/// oscillates and a single high-order panel would be inaccurate.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    panels: usize,
    n: usize,
    mut f: F,
) -> f64 {
    let r = rule(n);
    let mut acc = 0.0;
    let width = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + width * k as f64;
        let hi = if k + 1 == panels { b } else { lo + width };
        acc += r.integrate(lo, hi, &mut f);
    }
    acc
}
