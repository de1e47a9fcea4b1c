//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails or overruns its time budget.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinlock_cli::config::Grid;
use spinlock_cli::output::{data_rows, Cell, Table};
use spinlock_cli::{run, run_with_threads, Experiment, RunConfig};
use spinlock_core::analytic::min_detectable_phase;
use spinlock_core::full_space::full_space_oracle;
use spinlock_core::lockin::{measurement_range, CurvePoint};
use spinlock_core::operator::{max_abs, CMatrix};
use spinlock_core::photon_atom::{
    atomic_map_error, bch_error, build_stokes_ops, log_log_slope, max_sx_state, SqueezeParams,
};
use spinlock_core::spin::{build_collective_ops, dicke_schedule_moments, expect, x_css, Generator};
use spinlock_core::{PhaseTriple, PulseSchedule, C64};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn css_moments() -> Check {
    let ops = build_collective_ops(50).map_err(err)?;
    let psi = x_css(50).map_err(err)?;
    let jx = expect(&psi, &ops.jx).map_err(err)?;
    let jz = expect(&psi, &ops.jz).map_err(err)?;
    let jz2 = expect(&psi, &ops.jz2).map_err(err)?;
    let dev = (jx - 25.0).abs().max(jz.abs()).max((jz2 - 12.5).abs());
    ensure(
        dev < 1e-12,
        format!("<Jx>={jx:.15} <Jz>={jz:.1e} <Jz2>={jz2:.15} max dev {dev:.1e}"),
    )
}

fn sql_reduction() -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=100 {
        let p = PhaseTriple::new(0.0, 0.0, 0.0).map_err(err)?;
        let d = min_detectable_phase(&p, n).map_err(err)?;
        worst = worst.max((d * (n as f64).sqrt() - 1.0).abs());
    }
    ensure(
        worst < 1e-12,
        format!("max |dphi*sqrt(N)-1| = {worst:.1e} over N=1..100"),
    )
}

fn commutator_residual(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> f64 {
    let comm = a * b - b * a;
    max_abs(&(comm - c.map(|z| z * C64::new(0.0, 1.0))))
}

fn algebra() -> Check {
    let mut worst: f64 = 0.0;
    let mut eig_dev: f64 = 0.0;
    for n in 1..=20 {
        let o = build_collective_ops(n).map_err(err)?;
        let (x, y, z) = (o.jx.entries(), o.jy.entries(), o.jz.entries());
        worst = worst
            .max(commutator_residual(x, y, z))
            .max(commutator_residual(y, z, x))
            .max(commutator_residual(z, x, y));
        let s = build_stokes_ops(n).map_err(err)?;
        let (x, y, z) = (s.sx.entries(), s.sy.entries(), s.sz.entries());
        worst = worst
            .max(commutator_residual(x, y, z))
            .max(commutator_residual(y, z, x))
            .max(commutator_residual(z, x, y));
        let (lambda, _) = max_sx_state(&s);
        eig_dev = eig_dev.max((lambda - n as f64 / 2.0).abs());
    }
    ensure(
        worst < 1e-12 && eig_dev < 1e-10,
        format!("commutator residual {worst:.1e}, max eig(Sx) dev {eig_dev:.1e}"),
    )
}

fn oracle_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let gens = [Generator::Jz2, Generator::Jz, Generator::Jx];
    let mut worst: f64 = 0.0;
    let trials = 120;
    for t in 0..trials {
        let n = 1 + t % 4;
        let mut sched = PulseSchedule::new();
        for _ in 0..rng.random_range(1..=8) {
            let g = gens[rng.random_range(0..gens.len())];
            sched = sched.step(g, rng.random_range(-3.0..3.0));
        }
        let a = dicke_schedule_moments(n, &sched).map_err(err)?;
        let b = full_space_oracle(n, &sched).map_err(err)?;
        worst = worst.max(a.max_abs_diff(&b));
    }
    ensure(
        worst < 1e-10,
        format!("{trials} random schedules, N<=4, max moment diff {worst:.1e}"),
    )
}

fn bch() -> Check {
    let grid = [1e-3, 2e-3, 5e-3, 1e-2];
    let mut points = Vec::new();
    let mut map_ok = true;
    let mut worst_map: f64 = 0.0;
    for gt in grid {
        let p = SqueezeParams::derived(1.0, gt, 4);
        let e = bch_error(&p, 4, 4).map_err(err)?;
        let m = atomic_map_error(&p, 4, 4).map_err(err)?;
        map_ok &= m <= e;
        worst_map = worst_map.max(m);
        points.push((gt, e));
    }
    let slope = log_log_slope(&points).map_err(err)?;
    ensure(
        (slope - 3.0).abs() <= 0.3 && map_ok,
        format!("slope {slope:.4}; atomic-map error max {worst_map:.2e} within cubic remainder: {map_ok}"),
    )
}

fn reference_config() -> RunConfig {
    let mut cfg = RunConfig::with_defaults(Experiment::Contrast);
    cfg.physics.n_atoms = 50;
    cfg.physics.n_photons = Some(50);
    cfg.physics.g = 1000.0;
    cfg.physics.tau = 1e-4 / 1000.0;
    cfg.physics.chi_override = None;
    cfg.physics.squeeze_duration = None;
    cfg.physics.n_atoms_list = None;
    cfg.mc.samples = 2000;
    cfg.mc.seed = 2024;
    cfg.resolve();
    cfg
}

fn float(c: &Cell) -> f64 {
    match c {
        Cell::Float(v) => *v,
        Cell::Int(v) => *v as f64,
        _ => f64::NAN,
    }
}

/// Points of one series, selected by atom number and (optionally) alpha.
fn series(table: &Table, n_atoms: usize, alpha: Option<f64>) -> Vec<CurvePoint> {
    table
        .rows
        .iter()
        .filter(|r| float(&r[3]) == n_atoms as f64)
        .filter(|r| alpha.is_none_or(|a| (float(&r[4]) - a).abs() <= 1e-9 * a.abs()))
        .map(|r| CurvePoint {
            x: float(&r[0]),
            estimate: float(&r[1]),
            stderr: float(&r[2]),
        })
        .collect()
}

fn lockin_dips() -> Check {
    let mut cfg = reference_config();
    cfg.lockin.tau_arm_grid = Some(Grid::List(vec![4.5, 5.0, 5.5, 9.5, 10.0, 10.5]));
    let table = run(&cfg).map_err(err)?;
    let c = series(&table, 50, None);
    let mut ok = true;
    let mut parts = Vec::new();
    for (dip, lo, hi) in [(1, 0, 2), (4, 3, 5)] {
        for nb in [lo, hi] {
            let gap = c[nb].estimate - c[dip].estimate;
            let need = 3.0 * (c[nb].stderr.powi(2) + c[dip].stderr.powi(2)).sqrt();
            ok &= gap >= need;
            parts.push(format!(
                "{:.1}ms {:.4} vs {:.1}ms {:.4} (gap {:.4}, 3se {:.4})",
                c[dip].x, c[dip].estimate, c[nb].x, c[nb].estimate, gap, need
            ));
        }
    }
    ensure(ok, parts.join("; "))
}

fn squeezing_window() -> Check {
    let mut cfg = reference_config();
    cfg.physics.compare_unsqueezed = true;
    cfg.physics.n_atoms_list = Some(vec![50, 500]);
    cfg.lockin.tau_arm_grid = Some(Grid::range(1.0, 25.0, 0.08));
    let alpha = cfg.physics.alpha();
    let thr = cfg.lockin.threshold;
    let table = run(&cfg).map_err(err)?;
    let sq = measurement_range(&series(&table, 50, Some(alpha)), thr).map_err(err)?;
    let unsq = measurement_range(&series(&table, 50, Some(0.0)), thr).map_err(err)?;
    let big = measurement_range(&series(&table, 500, Some(alpha)), thr).map_err(err)?;
    let widen = sq.1 - sq.0 >= unsq.1 - unsq.0;
    let upper = big.1 >= sq.1;
    ensure(
        widen && upper,
        format!(
            "alpha={alpha:.3e}: squeezed [{:.2},{:.2}] ms, unsqueezed [{:.2},{:.2}] ms, N=500 [{:.2},{:.2}] ms",
            sq.0, sq.1, unsq.0, unsq.1, big.0, big.1
        ),
    )
}

fn sensitivity_ordering() -> Check {
    let mut cfg = reference_config();
    cfg.experiment = Experiment::Sensitivity;
    cfg.physics.n_atoms_list = Some(vec![50, 300, 500]);
    cfg.lockin.duration_grid = Some(Grid::range(20.0, 600.0, 2.0));
    let table = run(&cfg).map_err(err)?;
    let mins: Vec<(usize, CurvePoint)> = [50, 300, 500]
        .iter()
        .map(|&n| {
            let s = series(&table, n, None);
            (
                n,
                spinlock_core::lockin::curve_minimum(&s).expect("non-empty"),
            )
        })
        .collect();
    let ok = mins.windows(2).all(|w| w[1].1.estimate < w[0].1.estimate);
    let detail = mins
        .iter()
        .map(|(n, p)| format!("N={n}: {:.4e} Hz/sqrt(Hz) at {:.0} ms", p.estimate, p.x))
        .collect::<Vec<_>>()
        .join("; ");
    ensure(ok, detail)
}

fn determinism() -> Check {
    let mut contrast = reference_config();
    contrast.lockin.tau_arm_grid = Some(Grid::range(1.0, 25.0, 0.4));
    contrast.physics.compare_unsqueezed = true;
    let mut sens = reference_config();
    sens.experiment = Experiment::Sensitivity;
    sens.physics.n_atoms_list = Some(vec![50, 500]);
    sens.lockin.duration_grid = Some(Grid::range(20.0, 600.0, 20.0));
    let mut compared = 0;
    for cfg in [&contrast, &sens] {
        let one = run_with_threads(cfg, Some(1)).map_err(err)?.to_csv();
        let eight = run_with_threads(cfg, Some(8)).map_err(err)?.to_csv();
        let again = run_with_threads(cfg, Some(8)).map_err(err)?.to_csv();
        if data_rows(&one) != data_rows(&eight) || one != again {
            return Err(format!(
                "{} rows differ between worker counts",
                cfg.experiment.name()
            ));
        }
        compared += data_rows(&one).len();
    }

    let dir = std::env::temp_dir().join(format!("spinlock-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let cfg_path = dir.join("contrast.json");
    std::fs::write(&cfg_path, contrast.to_json()).map_err(err)?;
    // Same output path for both runs, since the path is part of the echoed config.
    let out = dir.join("out.csv");
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let status = Command::new(env!("CARGO_BIN_EXE_spinlock"))
            .args(["run", "--threads", threads, "--config"])
            .arg(&cfg_path)
            .arg("--output")
            .arg(&out)
            .status()
            .map_err(err)?;
        if !status.success() {
            return Err(format!("binary exited with {status}"));
        }
        outputs.push(std::fs::read(&out).map_err(err)?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(
        outputs[0] == outputs[1],
        format!("{compared} rows identical at 1 and 8 workers; binary output byte-identical"),
    )
}

fn mc_convergence() -> Check {
    let mut cfg = reference_config();
    cfg.lockin.tau_arm_grid = Some(Grid::List(vec![3.0, 5.0, 7.5, 10.0, 15.0]));
    let base = run(&cfg).map_err(err)?;
    cfg.mc.samples = 8000;
    let quad = run(&cfg).map_err(err)?;
    let a = series(&base, 50, None);
    let b = series(&quad, 50, None);
    let ratios: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p.stderr / q.stderr).collect();
    let ok = ratios.iter().all(|r| (r / 2.0 - 1.0).abs() <= 0.3);
    let shown: Vec<String> = a
        .iter()
        .zip(&ratios)
        .map(|(p, r)| format!("{:.1}ms {r:.3}", p.x))
        .collect();
    ensure(
        ok,
        format!("stderr(2000)/stderr(8000): {}", shown.join(", ")),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Check); 10] = [
        ("AC1 CSS moments", 1, css_moments),
        ("AC2 SQL reduction", 1, sql_reduction),
        ("AC3 su(2)/Stokes algebra", 5, algebra),
        ("AC4 Dicke vs product-space oracle", 60, oracle_soundness),
        ("AC5 BCH cubic remainder", 60, bch),
        ("AC6 lock-in dips", 300, lockin_dips),
        ("AC7 squeezing widens window", 600, squeezing_window),
        ("AC8 sensitivity ordering", 600, sensitivity_ordering),
        ("AC9 determinism across workers", 120, determinism),
        ("AC10 MC convergence", 300, mc_convergence),
    ];
    let mut failures = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let (status, detail) = match &result {
            Ok(d) if in_time => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d} [over {limit}s budget]")),
            Err(d) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "[{status}] {name} ({:.2}s / {limit}s): {detail}",
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
