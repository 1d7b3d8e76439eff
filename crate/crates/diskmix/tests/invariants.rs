//! Cross-module invariants: properties that must hold for any admissible
//! input, checked on randomized data. Case counts are kept small because
//! several properties run quadrature or solves per case.

use diskmix::closed_form::exact_tile_average;
use diskmix::datum::{
    banded_datum, half_disk_datum, make_step_radial, AngularProfile, Band, ScalarDatum,
    StepProfile,
};
use diskmix::flow::{evaluate_solution, forward_point, pullback_point, FieldSnapshot};
use diskmix::geometry::{ceil_two_pi, floor_two_pi, wrap_angle, PolarPoint, TWO_PI};
use diskmix::metrics::functional::{h_minus_one_inhomogeneous, h_minus_one_norm};
use diskmix::metrics::geometric::{ball_average_field, default_epsilon_grid, geometric_scale};
use diskmix::par;
use diskmix::testfns::standard_suite;
use diskmix::tiling::{
    build_tiling, locate, subtiles, tile_average_quadrature, tile_count, AnnularTile,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random mean-free step profile with 2..=6 pieces and a minimum gap, so
/// no degenerate sliver distorts quadrature splits.
fn random_profile(rng: &mut ChaCha8Rng) -> StepProfile {
    let pieces = rng.gen_range(2..=6usize);
    let mut cuts: Vec<f64> = (0..pieces - 1)
        .map(|_| rng.gen_range(0.05..TWO_PI - 0.05))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let mut breakpoints = vec![0.0];
    breakpoints.extend(cuts);
    breakpoints.push(TWO_PI);
    let n = breakpoints.len() - 1;
    let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let total: f64 = (0..n)
        .map(|k| values[k] * (breakpoints[k + 1] - breakpoints[k]))
        .sum();
    let mean = total / TWO_PI;
    for v in values.iter_mut() {
        *v -= mean;
    }
    StepProfile::new(breakpoints, values).unwrap()
}

fn random_step_radial(rng: &mut ChaCha8Rng, level: u32) -> ScalarDatum {
    let profiles = (0..(1u32 << level)).map(|_| random_profile(rng)).collect();
    make_step_radial(level, profiles).unwrap()
}

fn random_banded(rng: &mut ChaCha8Rng) -> ScalarDatum {
    let bands = rng.gen_range(1..=3usize);
    let mut edges: Vec<f64> = (0..bands - 1).map(|_| rng.gen_range(0.1..0.9)).collect();
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    edges.push(1.0);
    let bands = edges
        .iter()
        .map(|&r_hi| Band {
            r_hi,
            profile: AngularProfile::Steps(random_profile(rng)),
        })
        .collect();
    banded_datum(bands).unwrap()
}

// ---------------------------------------------------------------------------
// geometry

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wrapped_angles_land_in_base_period(theta in -1e6..1e6f64) {
        let w = wrap_angle(theta);
        prop_assert!((0.0..TWO_PI).contains(&w));
        // wrapping is 2π-periodic up to roundoff at the input's magnitude
        let w2 = wrap_angle(theta + TWO_PI);
        let tol = 1e-9 * (1.0 + theta.abs());
        let diff = (w - w2).abs();
        prop_assert!(diff < tol || (TWO_PI - diff) < tol);
    }

    #[test]
    fn floor_and_ceil_bracket_by_full_periods(y in -1e4..1e4f64) {
        let lo = floor_two_pi(y);
        let hi = ceil_two_pi(y);
        prop_assert!(lo <= y + 1e-9 && y <= hi + 1e-9);
        let gap = hi - lo;
        prop_assert!(gap.abs() < 1e-9 || (gap - TWO_PI).abs() < 1e-9);
        // both are integer multiples of 2π
        for v in [lo, hi] {
            let k = (v / TWO_PI).round();
            prop_assert!((v - k * TWO_PI).abs() < 1e-9 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn polar_xy_round_trip(r in 0.01..1.0f64, theta in 0.0..TWO_PI) {
        let p = PolarPoint::new(r, theta);
        let xy = p.to_xy();
        let back = PolarPoint::from_xy(xy.x, xy.y);
        prop_assert!((back.r - r).abs() < 1e-12);
        let dth = (wrap_angle(back.theta) - wrap_angle(theta)).abs();
        prop_assert!(dth < 1e-9 || (TWO_PI - dth) < 1e-9);
    }
}

// ---------------------------------------------------------------------------
// tiling

#[test]
fn tiling_partitions_the_disk_area() {
    for level in 1..=6u32 {
        let tiles = build_tiling(level).unwrap();
        assert_eq!(tiles.len(), tile_count(level));
        let total: f64 = tiles.iter().map(|q| q.area()).sum();
        assert!(
            (total - std::f64::consts::PI).abs() < 1e-12,
            "level {level}: area sum {total}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn locate_round_trips_and_is_unique(
        r in 0.001..1.0f64,
        theta in 0.0..TWO_PI,
        level in 1..=5u32,
    ) {
        let p = PolarPoint::new(r, theta);
        let (i, j) = locate(p, level).unwrap();
        let named = AnnularTile::new(level, i, j);
        prop_assert!(named.contains(p), "({r},{theta}) not in located tile");
        // exactly one tile of the full tiling contains the point
        let tiles = build_tiling(level).unwrap();
        let holders = tiles.iter().filter(|q| q.contains(p)).count();
        prop_assert_eq!(holders, 1);
    }

    #[test]
    fn subtiles_partition_their_parent(
        level in 1..=3u32,
        seed in any::<u64>(),
        extra in 0..=2u32,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tiles = build_tiling(level).unwrap();
        let q = &tiles[rng.gen_range(0..tiles.len())];
        let subs = subtiles(q, level + extra).unwrap();
        let total: f64 = subs.iter().map(|s| s.area()).sum();
        prop_assert!((total - q.area()).abs() < 1e-12 * q.area().max(1e-6));
    }
}

// ---------------------------------------------------------------------------
// advection

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solution_is_angular_pullback(seed in any::<u64>(), t in 0.0..200.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lvl = rng.gen_range(0..=2);
        let d = random_step_radial(&mut rng, lvl);
        for _ in 0..50 {
            let r = rng.gen_range(0.0..1.0f64);
            let theta = rng.gen_range(0.0..TWO_PI);
            let direct = d.eval(r, theta - TWO_PI * t * r);
            let via_flow = evaluate_solution(&d, t, PolarPoint::new(r, theta));
            prop_assert!((direct - via_flow).abs() <= 1e-12);
        }
    }

    #[test]
    fn flow_map_round_trips(r in 0.01..1.0f64, theta in 0.0..TWO_PI, t in 0.0..50.0f64) {
        let p = PolarPoint::new(r, theta);
        let back = pullback_point(forward_point(p, t), t);
        prop_assert!((back.r - r).abs() < 1e-12);
        let dth = (wrap_angle(back.theta) - theta).abs();
        prop_assert!(dth < 1e-8 * (1.0 + t) || (TWO_PI - dth) < 1e-8 * (1.0 + t));
    }

    #[test]
    fn transport_preserves_sup_norm(seed in any::<u64>(), t in 0.0..100.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_banded(&mut rng);
        let snapshot = FieldSnapshot::new(&d, t);
        let sup = d.sup_norm();
        prop_assert!((snapshot.sup_norm() - sup).abs() <= 1e-12 * (1.0 + sup));
        for _ in 0..30 {
            let r = rng.gen_range(0.0..1.0f64);
            let theta = rng.gen_range(0.0..TWO_PI);
            prop_assert!(snapshot.eval(r, theta).abs() <= sup + 1e-12);
        }
    }
}

// ---------------------------------------------------------------------------
// the two tile-average routes, plus a third independent estimate

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn oracle_agrees_with_quadrature(seed in any::<u64>(), which_t in 0..3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lvl = rng.gen_range(0..=3);
        let d = random_step_radial(&mut rng, lvl);
        let level = rng.gen_range(1..=4u32);
        let tiles = build_tiling(level).unwrap();
        let q = &tiles[rng.gen_range(0..tiles.len())];
        let t = [0.5, 5.0, 50.0][which_t];
        let exact = exact_tile_average(&d, q, t, 8).unwrap();
        let snapshot = FieldSnapshot::new(&d, t);
        let quad = tile_average_quadrature(&snapshot, q, 8);
        // floor the denominator: tiles whose true average is 0 (e.g. any
        // full annulus of a mean-free profile) leave both routes at pure
        // cancellation roundoff, where a relative gauge is meaningless
        let scale = exact.abs().max(quad.abs()).max(1e-4 * d.sup_norm());
        prop_assert!(
            (exact - quad).abs() / scale <= 1e-8,
            "t={t} tile=({},{},{}): {exact} vs {quad}", q.level, q.i, q.j
        );
    }

    #[test]
    fn subtile_averages_recompose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lvl = rng.gen_range(0..=2);
        let d = random_step_radial(&mut rng, lvl);
        let level = rng.gen_range(1..=3u32);
        let tiles = build_tiling(level).unwrap();
        let q = &tiles[rng.gen_range(0..tiles.len())];
        let t = rng.gen_range(0.0..20.0f64);
        let snapshot = FieldSnapshot::new(&d, t);
        let whole = tile_average_quadrature(&snapshot, q, 8) * q.area();
        let mut sum = 0.0;
        for s in subtiles(q, level + 2).unwrap() {
            let sq = AnnularTile {
                level: q.level,
                i: q.i,
                j: q.j,
                r_lo: s.r_lo,
                r_hi: s.r_hi,
                theta_lo: s.theta_lo,
                theta_hi: s.theta_hi,
            };
            sum += tile_average_quadrature(&snapshot, &sq, 8) * sq.area();
        }
        prop_assert!(
            (whole - sum).abs() < 1e-10 * (1.0 + whole.abs()),
            "{whole} vs recomposed {sum}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Plain 2D midpoint sum in polar coordinates: shares nothing with
    /// either production route. Loose tolerance; the integrand is a step
    /// function and the rule only converges linearly at its jumps.
    #[test]
    fn midpoint_sum_corroborates_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lvl = rng.gen_range(0..=1);
        let d = random_step_radial(&mut rng, lvl);
        let level = rng.gen_range(1..=2u32);
        let tiles = build_tiling(level).unwrap();
        let q = &tiles[rng.gen_range(0..tiles.len())];
        let t = rng.gen_range(0.2..3.0f64);
        let exact = exact_tile_average(&d, q, t, 8).unwrap();
        let n = 700;
        let (mut acc, mut mass) = (0.0, 0.0);
        for i in 0..n {
            let r = q.r_lo + (q.r_hi - q.r_lo) * (i as f64 + 0.5) / n as f64;
            for k in 0..n {
                let th = q.theta_lo + (q.theta_hi - q.theta_lo) * (k as f64 + 0.5) / n as f64;
                acc += d.eval(r, th - TWO_PI * t * r) * r;
                mass += r;
            }
        }
        let brute = acc / mass;
        prop_assert!(
            (exact - brute).abs() < 2e-2 * (1.0 + d.sup_norm()),
            "oracle {exact} vs midpoint {brute}"
        );
    }
}

// ---------------------------------------------------------------------------
// meters

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn neumann_solve_closes_its_duality_gap(seed in any::<u64>(), t in 0.0..30.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_banded(&mut rng);
        let s = FieldSnapshot::new(&d, t);
        let solve = h_minus_one_norm(&s, 64, 32).unwrap();
        prop_assert!(solve.duality_gap < 1e-10, "gap {}", solve.duality_gap);
        prop_assert!(solve.residual < 1e-10, "residual {}", solve.residual);
        prop_assert!(solve.norm_value.is_finite() && solve.norm_value >= 0.0);
    }

    #[test]
    fn mass_term_only_shrinks_the_norm(seed in any::<u64>(), t in 0.0..30.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_banded(&mut rng);
        let s = FieldSnapshot::new(&d, t);
        let hom = h_minus_one_norm(&s, 64, 32).unwrap().norm_value;
        let inh = h_minus_one_inhomogeneous(&s, 64, 32).unwrap().norm_value;
        prop_assert!(inh <= hom * (1.0 + 1e-9), "{inh} > {hom}");
    }

    #[test]
    fn ball_averages_are_dominated_by_the_sup(seed in any::<u64>(), t in 0.0..40.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_banded(&mut rng);
        let s = FieldSnapshot::new(&d, t);
        let eps = rng.gen_range(0.06..0.8);
        let f = ball_average_field(&s, eps, 64).unwrap();
        let sup = d.sup_norm();
        prop_assert!(f.sup() <= sup * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn larger_accuracy_never_needs_a_larger_ball(seed in any::<u64>(), t in 1.0..40.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_banded(&mut rng);
        let s = FieldSnapshot::new(&d, t);
        let grid = default_epsilon_grid(64, 2.0);
        let loose = geometric_scale(&s, 0.5, 64, &grid).unwrap();
        let tight = geometric_scale(&s, 0.2, 64, &grid).unwrap();
        prop_assert!(loose.epsilon_upper <= tight.epsilon_upper);
    }
}

// ---------------------------------------------------------------------------
// determinism and execution-mode equivalence

#[test]
fn sequential_scope_reproduces_parallel_bits() {
    let d = half_disk_datum();
    let s = FieldSnapshot::new(&d, 12.0);
    let par_run = h_minus_one_norm(&s, 128, 32).unwrap();
    let seq_run = par::run_sequential(|| h_minus_one_norm(&s, 128, 32).unwrap());
    assert_eq!(par_run.norm_value.to_bits(), seq_run.norm_value.to_bits());
    assert_eq!(par_run.duality_gap.to_bits(), seq_run.duality_gap.to_bits());

    let grid = default_epsilon_grid(128, 1.0);
    let par_geo = geometric_scale(&s, 0.3, 128, &grid).unwrap();
    let seq_geo = par::run_sequential(|| geometric_scale(&s, 0.3, 128, &grid).unwrap());
    assert_eq!(par_geo.epsilon_upper.to_bits(), seq_geo.epsilon_upper.to_bits());
    for (a, b) in par_geo.tested.iter().zip(&seq_geo.tested) {
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
}

#[test]
fn test_function_suite_has_poincare_ceiling() {
    let mut worst = 0.0f64;
    for f in standard_suite() {
        for level in 2..=4u32 {
            worst = worst.max(diskmix::metrics::inequalities::poincare_ratio(&f, level));
        }
    }
    assert!(worst > 0.0 && worst <= 4.0, "worst ratio {worst}");
}
