//! Monte-Carlo fringe contrast and sensitivity sweeps.
//!
//! Every sample draws its noise phases from its own RNG, seeded from
//! `(master_seed, point_index, sample_index)`. Samples are evaluated in
//! parallel into an indexed buffer and reduced sequentially, so results do
//! not depend on the number of worker threads.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{expect_jx, min_detectable_phase};
use crate::error::{Error, Result};
use crate::noise::{Accumulation, LockInSchedule, NoiseComponent, NoisePhase, PhaseKernel};
use crate::spin::PhaseTriple;

pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// What is averaged over the noise phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ContrastIntegrand {
    /// Ramsey amplitude `⟨Jx⟩(α, β)` normalised by its noise-free value.
    #[default]
    Ramsey,
    /// `cos(δφ(α, β, γ))` with the closed-form phase resolution and `γ` the
    /// drive area of the π-pulse train.
    Eq23,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ContrastModel {
    pub integrand: ContrastIntegrand,
    pub accumulation: Accumulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub master_seed: u64,
    pub n_atoms: usize,
    pub n_photons: usize,
    /// Twisting strength in rad/s.
    pub chi: f64,
    /// Squeezing time in seconds; `α = χ · squeeze_duration`.
    pub squeeze_duration: f64,
    pub model: ContrastModel,
}

impl McConfig {
    pub fn alpha(&self) -> f64 {
        self.chi * self.squeeze_duration
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be positive".into()));
        }
        Ok(())
    }
}

/// One point of a contrast or sensitivity series. `x` is in ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: f64,
    pub stderr: f64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the RNG stream owned by one `(point, sample)` pair.
pub fn derive_seed(master_seed: u64, point_index: u64, sample_index: u64) -> u64 {
    let a = splitmix64(master_seed);
    let b = splitmix64(a ^ point_index.wrapping_mul(GOLDEN));
    splitmix64(b ^ sample_index)
}

fn draw_theta(components: &[NoiseComponent], rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
    out.clear();
    for c in components {
        // Always consume a draw so fixed phases do not shift other streams.
        let u: f64 = rng.random();
        out.push(match c.phase {
            NoisePhase::Fixed(th) => th,
            NoisePhase::Random => TAU * u,
        });
    }
}

/// Noise phases of one `(point, sample)` stream, as used by the Monte-Carlo
/// average.
pub fn sample_phases(
    components: &[NoiseComponent],
    master_seed: u64,
    point_index: u64,
    sample_index: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, point_index, sample_index));
    let mut theta = Vec::with_capacity(components.len());
    draw_theta(components, &mut rng, &mut theta);
    theta
}

struct SampleModel {
    integrand: ContrastIntegrand,
    alpha: f64,
    gamma: f64,
    n_atoms: usize,
    norm: f64,
}

impl SampleModel {
    fn new(mc: &McConfig, schedule: &LockInSchedule) -> Result<Self> {
        let alpha = mc.alpha();
        let gamma = schedule.drive_area();
        let norm = match mc.model.integrand {
            ContrastIntegrand::Ramsey => {
                let zero = expect_jx(&PhaseTriple::new(alpha, 0.0, 0.0)?, mc.n_atoms);
                if zero.abs() <= f64::MIN_POSITIVE {
                    return Err(Error::Domain(format!(
                        "noise-free Ramsey amplitude vanishes at alpha = {alpha}"
                    )));
                }
                zero
            }
            ContrastIntegrand::Eq23 => 1.0,
        };
        Ok(Self {
            integrand: mc.model.integrand,
            alpha,
            gamma,
            n_atoms: mc.n_atoms,
            norm,
        })
    }

    fn value(&self, beta: f64) -> Result<f64> {
        match self.integrand {
            ContrastIntegrand::Ramsey => {
                let p = PhaseTriple::new(self.alpha, beta, 0.0)?;
                Ok(expect_jx(&p, self.n_atoms) / self.norm)
            }
            ContrastIntegrand::Eq23 => {
                let p = PhaseTriple::new(self.alpha, beta, self.gamma)?;
                Ok(min_detectable_phase(&p, self.n_atoms)?.cos())
            }
        }
    }
}

/// Mean and standard error of the mean, summed in index order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Contrast at one schedule, with the RNG streams of grid point `point_index`.
pub fn fringe_contrast_at(
    components: &[NoiseComponent],
    schedule: &LockInSchedule,
    mc: &McConfig,
    point_index: u64,
) -> Result<CurvePoint> {
    mc.validate()?;
    let kernel = PhaseKernel::new(components, schedule, mc.model.accumulation);
    let model = SampleModel::new(mc, schedule)?;
    let values = (0..mc.samples)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(components.len()),
            |theta, i| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(mc.master_seed, point_index, i as u64));
                draw_theta(components, &mut rng, theta);
                model.value(kernel.beta(theta)?)
            },
        )
        .collect::<Result<Vec<f64>>>()?;
    let (estimate, stderr) = mean_and_stderr(&values);
    Ok(CurvePoint {
        x: schedule.tau_arm * 1e3,
        estimate,
        stderr,
    })
}

/// Monte-Carlo fringe contrast `E_θ[...]` over uniformly random noise phases.
pub fn fringe_contrast_mc(
    components: &[NoiseComponent],
    schedule: &LockInSchedule,
    mc: &McConfig,
) -> Result<CurvePoint> {
    fringe_contrast_at(components, schedule, mc, 0)
}

/// Contrast versus arming time; `tau_arm_grid` in seconds, `x` in ms.
pub fn contrast_curve(
    components: &[NoiseComponent],
    n_pulses: usize,
    tau_arm_grid: &[f64],
    mc: &McConfig,
) -> Result<Vec<CurvePoint>> {
    tau_arm_grid
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| {
            let schedule = LockInSchedule::new(n_pulses, tau)?;
            fringe_contrast_at(components, &schedule, mc, i as u64)
        })
        .collect()
}

/// Widest contiguous run of points with `estimate >= threshold`, as
/// `(x_low, x_high)`. Ties go to the earliest run.
pub fn measurement_range(curve: &[CurvePoint], threshold: f64) -> Result<(f64, f64)> {
    if curve.is_empty() {
        return Err(Error::InvalidParameter("empty curve".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut start: Option<usize> = None;
    for i in 0..=curve.len() {
        let above = i < curve.len() && curve[i].estimate >= threshold;
        match (above, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let run = (curve[s].x, curve[i - 1].x);
                if best.is_none_or(|b| run.1 - run.0 > b.1 - b.0) {
                    best = Some(run);
                }
                start = None;
            }
            _ => {}
        }
    }
    best.ok_or(Error::EmptyRange(threshold))
}

/// Squeezed (or SQL, at `α = 0`) phase resolution at the fringe centre.
pub fn base_phase_resolution(alpha: f64, n_atoms: usize) -> Result<f64> {
    min_detectable_phase(&PhaseTriple::new(alpha, 0.0, 0.0)?, n_atoms)
}

/// Duration bookkeeping of one lock-in cycle of window `duration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleTiming {
    /// Time the spins integrate the signal, `N·τ_arm`.
    pub coherent: f64,
    /// Full cycle: squeezing plus the lock-in window. π/2 and π pulses are
    /// instantaneous.
    pub cycle: f64,
}

pub fn cycle_timing(schedule: &LockInSchedule, squeeze_duration: f64) -> CycleTiming {
    CycleTiming {
        coherent: schedule.coherent_time(),
        cycle: schedule.total_duration() + squeeze_duration,
    }
}

/// `S = δφ / (2π · T_coh) · sqrt(T_cycle)` in Hz/√Hz.
pub fn sensitivity_from(phase_resolution: f64, timing: CycleTiming) -> f64 {
    phase_resolution / (TAU * timing.coherent) * timing.cycle.sqrt()
}

/// Sensitivity at one sequence duration (seconds); `x` in ms.
///
/// The phase resolution is degraded by the Monte-Carlo contrast; where the
/// contrast is not positive the sensitivity is reported as infinite.
pub fn sensitivity_at(
    components: &[NoiseComponent],
    n_pulses: usize,
    duration: f64,
    mc: &McConfig,
    point_index: u64,
) -> Result<CurvePoint> {
    let schedule = LockInSchedule::for_duration(n_pulses, duration)?;
    let contrast = fringe_contrast_at(components, &schedule, mc, point_index)?;
    let timing = cycle_timing(&schedule, mc.squeeze_duration);
    let x = duration * 1e3;
    if contrast.estimate <= 0.0 {
        return Ok(CurvePoint {
            x,
            estimate: f64::INFINITY,
            stderr: f64::INFINITY,
        });
    }
    let dphi = base_phase_resolution(mc.alpha(), mc.n_atoms)? / contrast.estimate;
    let s = sensitivity_from(dphi, timing);
    Ok(CurvePoint {
        x,
        estimate: s,
        stderr: s * contrast.stderr / contrast.estimate,
    })
}

/// One sensitivity series per atom number. Grid points share RNG streams
/// across atom numbers.
pub fn sensitivity_curve(
    components: &[NoiseComponent],
    n_atoms_list: &[usize],
    n_pulses: usize,
    duration_grid: &[f64],
    mc: &McConfig,
) -> Result<Vec<(usize, Vec<CurvePoint>)>> {
    n_atoms_list
        .iter()
        .map(|&n_atoms| {
            let cfg = McConfig { n_atoms, ..*mc };
            let curve = duration_grid
                .par_iter()
                .enumerate()
                .map(|(i, &t)| sensitivity_at(components, n_pulses, t, &cfg, i as u64))
                .collect::<Result<Vec<_>>>()?;
            Ok((n_atoms, curve))
        })
        .collect()
}

/// Point with the smallest estimate.
pub fn curve_minimum(curve: &[CurvePoint]) -> Option<CurvePoint> {
    curve
        .iter()
        .copied()
        .min_by(|a, b| a.estimate.total_cmp(&b.estimate))
}
