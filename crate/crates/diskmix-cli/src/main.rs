//! Command line front end: run experiments, list the registry, verify core
//! invariants. Exit codes: 0 success, 1 configuration or runtime error, 2 an
//! acceptance window or invariant failed.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use diskmix::harness::config::ExperimentConfig;
use diskmix::harness::experiments::{self, evaluate_checks, run_experiment};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "diskmix",
    version,
    about = "Mixing meters for scalar transport under radial shear on the unit disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config file or the built-in registry.
    Run {
        /// Path to an experiment config (JSON).
        #[arg(long, conflicts_with = "experiment")]
        config: Option<PathBuf>,
        /// Built-in experiment id; see `list-experiments`.
        #[arg(long)]
        experiment: Option<String>,
        /// Override the configured output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// List the built-in experiments.
    ListExperiments,
    /// Print a built-in experiment's configuration as JSON.
    ShowConfig { id: String },
    /// Run the fast invariant suite.
    Verify,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match thread_cap() {
        Ok(cap) => diskmix::par::init_threads(cap),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            experiment,
            output_dir,
        } => cmd_run(config, experiment, output_dir),
        Command::ListExperiments => cmd_list(),
        Command::ShowConfig { id } => cmd_show(&id),
        Command::Verify => Ok(verify::run()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("DISKMIX_THREADS") {
        Ok(s) => {
            let n: usize = s
                .parse()
                .with_context(|| format!("DISKMIX_THREADS must be a positive integer, got {s:?}"))?;
            if n == 0 {
                bail!("DISKMIX_THREADS must be at least 1");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn cmd_run(
    config_path: Option<PathBuf>,
    experiment: Option<String>,
    output_dir: Option<PathBuf>,
) -> Result<u8> {
    let mut config = match (config_path, experiment) {
        (Some(path), None) => ExperimentConfig::from_json_file(&path)
            .with_context(|| format!("loading {}", path.display()))?,
        (None, Some(id)) => experiments::builtin(&id)
            .with_context(|| format!("unknown experiment {id:?}; see list-experiments"))?,
        _ => bail!("pass exactly one of --config or --experiment"),
    };
    if let Some(dir) = output_dir {
        config.output_dir = dir;
    }
    let report = run_experiment(&config)?;
    println!(
        "{}: {} rows -> {}",
        report.experiment_id,
        report.rows.len(),
        config.output_dir.display()
    );
    for slope in &report.slopes {
        println!(
            "  fit {}: slope {:.4} over t in [{}, {}]",
            slope.series, slope.slope, slope.window.0, slope.window.1
        );
    }
    for (name, value) in &report.constants {
        println!("  const {name} = {value:.6}");
    }
    let checks = evaluate_checks(&config, &report);
    let mut all_passed = true;
    for check in &checks {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", check.name, check.detail);
        all_passed &= check.passed;
    }
    Ok(if all_passed { 0 } else { 2 })
}

fn cmd_list() -> Result<u8> {
    for id in experiments::builtin_ids() {
        println!("{id:6} {}", experiments::describe(id).unwrap_or_default());
    }
    Ok(0)
}

fn cmd_show(id: &str) -> Result<u8> {
    let config = experiments::builtin(id)
        .with_context(|| format!("unknown experiment {id:?}; see list-experiments"))?;
    println!("{}", config.to_json_string());
    Ok(0)
}

mod verify {
    use diskmix::datum::{self, StepProfile};
    use diskmix::flow::{evaluate_solution, FieldSnapshot};
    use diskmix::geometry::PolarPoint;
    use diskmix::harness::config::{DatumSpec, ExperimentConfig, TimeGrid};
    use diskmix::harness::experiments::run_experiment;
    use diskmix::metrics::functional::h_minus_one_norm;
    use diskmix::metrics::geometric::{default_epsilon_grid, geometric_scale};
    use diskmix::metrics::inequalities::poincare_ratio;
    use diskmix::special::bessel_j;
    use diskmix::testfns::TestFunction;
    use diskmix::tiling::{build_tiling, tile_average_quadrature};
    use diskmix::closed_form;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    pub fn run() -> u8 {
        let mut all = true;
        let mut check = |name: &str, passed: bool, detail: String| {
            println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
            all &= passed;
        };

        // the tiling partitions the disk
        for level in [2u32, 5] {
            let area: f64 = build_tiling(level)
                .unwrap()
                .iter()
                .map(|q| q.area())
                .sum();
            check(
                "tiling partition",
                (area - PI).abs() <= 1e-12,
                format!("level {level}: area sum off by {:.3e}", (area - PI).abs()),
            );
        }

        // transport is exact composition with the rotation
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let datum = datum::half_disk_datum();
        let mut worst = 0.0f64;
        for _ in 0..2000 {
            let r: f64 = rng.gen::<f64>();
            let theta = rng.gen::<f64>() * 2.0 * PI;
            let t = rng.gen::<f64>() * 50.0;
            let direct = datum.eval(r, theta - 2.0 * PI * t * r);
            let via = evaluate_solution(&datum, t, PolarPoint::new(r, theta));
            worst = worst.max((direct - via).abs());
        }
        check(
            "advection exactness",
            worst <= 1e-12,
            format!("max abs error {worst:.3e}"),
        );

        // closed-form tile averages agree with blind quadrature
        let mut worst_rel = 0.0f64;
        for case in 0..20 {
            let level = 1 + (case % 3) as u32;
            let profiles: Vec<StepProfile> = (0..(1u32 << level))
                .map(|l| StepProfile::square_wave(1 + (l + case as u32) % 2))
                .collect();
            let d = datum::make_step_radial(level, profiles).unwrap();
            let t = [0.5, 5.0, 50.0][case % 3];
            let snapshot = FieldSnapshot::new(&d, t);
            let tiles = build_tiling(3).unwrap();
            let tile = &tiles[(7 * case + 3) % tiles.len()];
            let exact = closed_form::exact_tile_average(&d, tile, t, 8).unwrap();
            let quad = tile_average_quadrature(&snapshot, tile, 8);
            worst_rel = worst_rel.max((exact - quad).abs() / exact.abs().max(1.0));
        }
        check(
            "tile average oracle",
            worst_rel <= 1e-8,
            format!("max relative disagreement {worst_rel:.3e}"),
        );

        // the negative-norm solve is self-consistent and matches the
        // eigenfunction oracle
        let snapshot = FieldSnapshot::new(&datum, 5.0);
        match h_minus_one_norm(&snapshot, 256, 32) {
            Ok(solve) => {
                check(
                    "solver duality",
                    solve.duality_gap <= 1e-10 && solve.residual <= 1e-8,
                    format!(
                        "duality gap {:.3e}, residual {:.3e}",
                        solve.duality_gap, solve.residual
                    ),
                );
            }
            Err(e) => check("solver duality", false, format!("{e}")),
        }
        let k = 1.8411837813406593f64;
        let eigen = datum::modal_datum(vec![diskmix::datum::Mode {
            m: 1,
            radial: diskmix::datum::RadialProfile::BesselJ { order: 1, frequency: k },
            phase: 0.0,
        }])
        .unwrap();
        let eigen_snapshot = FieldSnapshot::new(&eigen, 0.0);
        match h_minus_one_norm(&eigen_snapshot, 512, 32) {
            Ok(solve) => {
                let l2 = (PI * (k * k - 1.0) / (2.0 * k * k)).sqrt() * bessel_j(1, k).abs();
                let expected = l2 / k;
                let rel = (solve.norm_value - expected).abs() / expected;
                check(
                    "eigenfunction oracle",
                    rel <= 1e-4,
                    format!("relative error {rel:.3e}"),
                );
            }
            Err(e) => check("eigenfunction oracle", false, format!("{e}")),
        }

        // zero field is mixed at the smallest tested radius
        let zero = datum::zero_datum();
        let grid = default_epsilon_grid(128, 2.0);
        match geometric_scale(&FieldSnapshot::new(&zero, 1.0), 0.5, 128, &grid) {
            Ok(scale) => check(
                "zero field floor",
                scale.epsilon_upper == grid[0],
                format!("eps_upper {:.4e} vs grid min {:.4e}", scale.epsilon_upper, grid[0]),
            ),
            Err(e) => check("zero field floor", false, format!("{e}")),
        }

        // the stationary datum gives bitwise-equal meters at any two times
        let annulus = datum::stationary_annulus_datum();
        let grid = default_epsilon_grid(256, 2.0);
        let run_meters = |t: f64| -> (f64, f64) {
            let s = FieldSnapshot::new(&annulus, t);
            let g = geometric_scale(&s, 0.5, 256, &grid).unwrap();
            let h = h_minus_one_norm(&s, 128, 32).unwrap();
            (g.epsilon_upper, h.norm_value)
        };
        let (g0, h0) = run_meters(0.0);
        let (g1, h1) = run_meters(37.5);
        check(
            "stationary field",
            g0 == g1 && h0 == h1,
            format!("geometric {g0:.6e} vs {g1:.6e}, functional {h0:.6e} vs {h1:.6e}"),
        );

        // tile-level Poincaré ratio stays under the empirical ceiling
        let worst_ratio = poincare_ratio(&TestFunction::SaddleXY, 3);
        check(
            "tile Poincaré ceiling",
            worst_ratio > 0.0 && worst_ratio <= 4.0,
            format!("worst scaled ratio {worst_ratio:.3}"),
        );

        // the harness emits byte-identical reports for identical configs
        let base = std::env::temp_dir().join(format!("diskmix-verify-{}", std::process::id()));
        let mut config = ExperimentConfig {
            experiment_id: "verify".into(),
            datum: DatumSpec::HalfDisk,
            kappas: vec![0.4],
            time_grid: TimeGrid { t_min: 1.0, t_max: 8.0, points: 4 },
            raster_resolution: 128,
            radial_resolution: 64,
            mode_count: 32,
            max_epsilon: 2.0,
            output_dir: base.join("a"),
            seed: 5,
        };
        let det = run_experiment(&config).is_ok() && {
            config.output_dir = base.join("b");
            run_experiment(&config).is_ok()
        };
        let identical = det
            && std::fs::read(base.join("a/report.csv")).ok()
                == std::fs::read(base.join("b/report.csv")).ok();
        let _ = std::fs::remove_dir_all(&base);
        check(
            "deterministic reports",
            identical,
            "report.csv bytes compared across two identical runs".into(),
        );

        if all {
            println!("verify: all checks passed");
            0
        } else {
            println!("verify: FAILURES ABOVE");
            2
        }
    }
}
