//! Experiment dispatch. Every experiment turns a resolved config into a
//! [`Table`]; results never depend on the rayon pool size.

use sha2::{Digest, Sha256};
use spinlock_core::analytic::discrepancy;
use spinlock_core::lockin::{
    contrast_curve, sample_phases, sensitivity_curve, ContrastIntegrand, ContrastModel, McConfig,
};
use spinlock_core::noise::{synth_noise, Accumulation};
use spinlock_core::photon_atom::{bch_error, log_log_slope, SqueezeParams};
use spinlock_core::PhaseTriple;

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const CONTRAST_COLUMNS: [&str; 5] = ["tau_arm_ms", "contrast", "stderr", "n_atoms", "alpha"];
pub const SENSITIVITY_COLUMNS: [&str; 4] =
    ["T_ms", "sensitivity_hz_per_sqrt_hz", "stderr", "n_atoms"];
pub const BCH_COLUMNS: [&str; 2] = ["g_tau", "bch_error"];
pub const ORACLE_COLUMNS: [&str; 11] = [
    "ordering",
    "n_atoms",
    "alpha",
    "beta",
    "gamma",
    "jx_analytic",
    "jx_oracle",
    "jz_analytic",
    "jz_oracle",
    "dphi_analytic",
    "dphi_oracle",
];
pub const PREVIEW_COLUMNS: [&str; 2] = ["t_ms", "noise_hz"];

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub no_toggle: bool,
    pub contrast_integrand: Option<ContrastIntegrand>,
    pub output: Option<String>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(e) = self.experiment {
            cfg.experiment = e;
        }
        if let Some(s) = self.seed {
            cfg.mc.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.mc.samples = n;
        }
        if self.no_toggle {
            cfg.lockin.toggle = false;
        }
        if let Some(i) = self.contrast_integrand {
            cfg.lockin.contrast_integrand = i;
        }
        if let Some(p) = &self.output {
            cfg.output.path = Some(p.clone());
        }
        cfg.resolve();
        cfg.validate()
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    Sha256::digest(cfg.to_canonical_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Monte-Carlo settings in SI units for one atom number and twisting strength.
fn mc_config(cfg: &RunConfig, n_atoms: usize, chi_per_ms: f64) -> McConfig {
    McConfig {
        samples: cfg.mc.samples,
        master_seed: cfg.mc.seed,
        n_atoms,
        n_photons: cfg.physics.n_photons(),
        chi: chi_per_ms * 1e3,
        squeeze_duration: cfg.physics.squeeze_duration() * 1e-3,
        model: ContrastModel {
            integrand: cfg.lockin.contrast_integrand,
            accumulation: Accumulation {
                toggle: cfg.lockin.toggle,
                convention: cfg.lockin.phase_convention,
            },
        },
    }
}

fn ms_to_s(grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|t| t * 1e-3).collect()
}

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = match cfg.experiment {
        Experiment::Contrast => run_contrast(cfg)?,
        Experiment::Sensitivity => run_sensitivity(cfg)?,
        Experiment::VerifyBch => run_bch(cfg)?,
        Experiment::OracleCompare => run_oracle(cfg)?,
        Experiment::NoisePreview => run_preview(cfg)?,
    };
    let mut header = vec![
        (
            "generator".to_string(),
            format!("spinlock {}", env!("CARGO_PKG_VERSION")),
        ),
        (
            "core".to_string(),
            format!("spinlock-core {}", spinlock_core::VERSION),
        ),
        ("experiment".to_string(), cfg.experiment.name().to_string()),
        ("seed".to_string(), cfg.mc.seed.to_string()),
        ("config_sha256".to_string(), config_hash(cfg)),
        ("config".to_string(), cfg.to_canonical_json()),
    ];
    header.append(&mut table.metadata);
    table.metadata = header;
    Ok(table)
}

/// Runs inside a pool of `threads` workers (rayon's default when `None`).
pub fn run_with_threads(cfg: &RunConfig, threads: Option<usize>) -> Result<Table, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::validation("threads", &e.to_string()))?;
    pool.install(|| run(cfg))
}

fn run_contrast(cfg: &RunConfig) -> Result<Table, CliError> {
    let comps = cfg.noise.components()?;
    let grid = ms_to_s(&cfg.lockin.tau_arm_grid.as_ref().expect("resolved").points());
    let mut table = Table::new(&CONTRAST_COLUMNS);
    let mut chis = vec![cfg.physics.chi()];
    if cfg.physics.compare_unsqueezed {
        chis.push(0.0);
    }
    for n_atoms in cfg.physics.atom_numbers() {
        for &chi in &chis {
            let mc = mc_config(cfg, n_atoms, chi);
            let curve = contrast_curve(&comps, cfg.lockin.n_pulses, &grid, &mc)?;
            let alpha = mc.alpha();
            match spinlock_core::lockin::measurement_range(&curve, cfg.lockin.threshold) {
                Ok((lo, hi)) => table.meta(
                    &format!("range_ms[n_atoms={n_atoms},alpha={alpha:.6e}]"),
                    format!("{lo:.6},{hi:.6}"),
                ),
                Err(_) => table.meta(
                    &format!("range_ms[n_atoms={n_atoms},alpha={alpha:.6e}]"),
                    "none",
                ),
            }
            for p in curve {
                table.push(vec![
                    Cell::Float(p.x),
                    Cell::Float(p.estimate),
                    Cell::Float(p.stderr),
                    Cell::Int(n_atoms as u64),
                    Cell::Float(alpha),
                ]);
            }
        }
    }
    Ok(table)
}

fn run_sensitivity(cfg: &RunConfig) -> Result<Table, CliError> {
    let comps = cfg.noise.components()?;
    let grid = ms_to_s(
        &cfg.lockin
            .duration_grid
            .as_ref()
            .expect("resolved")
            .points(),
    );
    let mc = mc_config(cfg, cfg.physics.n_atoms, cfg.physics.chi());
    let series = sensitivity_curve(
        &comps,
        &cfg.physics.atom_numbers(),
        cfg.lockin.n_pulses,
        &grid,
        &mc,
    )?;
    let mut table = Table::new(&SENSITIVITY_COLUMNS);
    for (n_atoms, curve) in series {
        if let Some(min) = spinlock_core::lockin::curve_minimum(&curve) {
            table.meta(
                &format!("minimum[n_atoms={n_atoms}]"),
                format!("{:.6e} at {:.6} ms", min.estimate, min.x),
            );
        }
        for p in curve {
            table.push(vec![
                Cell::Float(p.x),
                Cell::Float(p.estimate),
                Cell::Float(p.stderr),
                Cell::Int(n_atoms as u64),
            ]);
        }
    }
    Ok(table)
}

fn run_bch(cfg: &RunConfig) -> Result<Table, CliError> {
    let (ns, na) = (cfg.bch.n_photons, cfg.bch.n_atoms);
    let mut table = Table::new(&BCH_COLUMNS);
    let mut points = Vec::new();
    for gt in cfg.bch.g_tau_grid.points() {
        // Only gτ enters the unitaries, so g is fixed to 1.
        let err = bch_error(&SqueezeParams::derived(1.0, gt, ns), ns, na)?;
        points.push((gt, err));
        table.push(vec![Cell::Float(gt), Cell::Float(err)]);
    }
    if points.len() >= 2 {
        table.meta("slope", format!("{:.6}", log_log_slope(&points)?));
    }
    table.meta("n_photons", ns);
    table.meta("n_atoms", na);
    Ok(table)
}

fn run_oracle(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&ORACLE_COLUMNS);
    for &ordering in &cfg.oracle.orderings {
        for n_atoms in cfg.physics.atom_numbers() {
            for &[a, b, g] in &cfg.oracle.phases {
                let d = discrepancy(&PhaseTriple::new(a, b, g)?, n_atoms, ordering)?;
                table.push(vec![
                    Cell::Text(ordering.name().to_string()),
                    Cell::Int(n_atoms as u64),
                    Cell::Float(a),
                    Cell::Float(b),
                    Cell::Float(g),
                    Cell::Float(d.jx_analytic),
                    Cell::Float(d.jx_oracle),
                    Cell::Float(d.jz_analytic),
                    Cell::Float(d.jz_oracle),
                    d.dphi_analytic.map_or(Cell::Missing, Cell::Float),
                    Cell::Float(d.dphi_oracle),
                ]);
            }
        }
    }
    Ok(table)
}

fn run_preview(cfg: &RunConfig) -> Result<Table, CliError> {
    let comps = cfg.noise.components()?;
    let theta = sample_phases(&comps, cfg.mc.seed, 0, 0);
    let mut table = Table::new(&PREVIEW_COLUMNS);
    for t in cfg.preview.times.points() {
        let n = synth_noise(&comps, &theta, t * 1e-3)?;
        table.push(vec![Cell::Float(t), Cell::Float(n)]);
    }
    Ok(table)
}
