//! Run configuration: JSON ingestion, defaults, and validation.
//!
//! User-facing units: times in ms, coupling rates in 1/ms, fields in pT,
//! frequencies in Hz. `load_config` fills every default so the resolved
//! configuration can be echoed into output headers and loaded back
//! unchanged.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spinlock_core::lockin::{ContrastIntegrand, DEFAULT_SAMPLES, DEFAULT_THRESHOLD};
use spinlock_core::noise::{NoiseComponent, NoisePhase, PhaseConvention, ELECTRON_GYRO_HZ_PER_NT};
use spinlock_core::photon_atom::effective_chi;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Contrast,
    Sensitivity,
    VerifyBch,
    OracleCompare,
    NoisePreview,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Contrast => "contrast",
            Experiment::Sensitivity => "sensitivity",
            Experiment::VerifyBch => "verify-bch",
            Experiment::OracleCompare => "oracle-compare",
            Experiment::NoisePreview => "noise-preview",
        }
    }
}

/// A sample grid, either listed or as an inclusive `start..=stop` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Grid::Range { start, stop, step }
    }

    /// Expands the grid; range points are `start + i·step` to avoid drift.
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if !step.is_finite() || *step <= 0.0 || stop < start {
                    return Vec::new();
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    fn validate(&self, key: &str) -> Result<(), CliError> {
        if let Grid::Range { start, stop, step } = self {
            if !(*step > 0.0 && step.is_finite()) {
                return Err(CliError::validation(key, "range step must be positive"));
            }
            if !(start.is_finite() && stop.is_finite()) || stop < start {
                return Err(CliError::validation(
                    key,
                    "range needs finite start <= stop",
                ));
            }
        }
        let pts = self.points();
        if pts.is_empty() {
            return Err(CliError::validation(key, "grid is empty"));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(CliError::validation(key, "grid values must be finite"));
        }
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::validation(
                key,
                "grid must be strictly increasing",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub n_atoms: usize,
    /// Defaults to `n_atoms`.
    #[serde(default)]
    pub n_photons: Option<usize>,
    /// Faraday coupling in 1/ms.
    #[serde(default = "default_g")]
    pub g: f64,
    /// Free-evolution interval of the squeezing sequence in ms.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Twisting strength in 1/ms; derived as `N_s g² τ / 8` when absent.
    #[serde(default)]
    pub chi_override: Option<f64>,
    /// Squeezing time in ms; defaults to the four-pulse length `4τ`.
    #[serde(default)]
    pub squeeze_duration: Option<f64>,
    /// Atom numbers swept by `contrast` and `sensitivity`; defaults to `[n_atoms]`.
    #[serde(default)]
    pub n_atoms_list: Option<Vec<usize>>,
    /// Also emit the `α = 0` curve in `contrast` runs.
    #[serde(default)]
    pub compare_unsqueezed: bool,
}

fn default_g() -> f64 {
    1000.0
}

fn default_tau() -> f64 {
    1e-4 / default_g()
}

impl Physics {
    pub fn n_photons(&self) -> usize {
        self.n_photons.unwrap_or(self.n_atoms)
    }

    /// `χ` in 1/ms.
    pub fn chi(&self) -> f64 {
        self.chi_override
            .unwrap_or_else(|| effective_chi(self.g, self.tau, self.n_photons()))
    }

    pub fn squeeze_duration(&self) -> f64 {
        self.squeeze_duration.unwrap_or(4.0 * self.tau)
    }

    pub fn alpha(&self) -> f64 {
        self.chi() * self.squeeze_duration()
    }

    pub fn atom_numbers(&self) -> Vec<usize> {
        self.n_atoms_list
            .clone()
            .unwrap_or_else(|| vec![self.n_atoms])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockIn {
    #[serde(default = "default_pulses")]
    pub n_pulses: usize,
    /// Arming times in ms (`contrast`).
    #[serde(default)]
    pub tau_arm_grid: Option<Grid>,
    /// Sequence durations in ms (`sensitivity`).
    #[serde(default)]
    pub duration_grid: Option<Grid>,
    #[serde(default = "default_true")]
    pub toggle: bool,
    #[serde(default)]
    pub phase_convention: PhaseConvention,
    #[serde(default)]
    pub contrast_integrand: ContrastIntegrand,
    /// Contrast level defining the measurement range.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_pulses() -> usize {
    7
}

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

impl Default for LockIn {
    fn default() -> Self {
        Self {
            n_pulses: default_pulses(),
            tau_arm_grid: None,
            duration_grid: None,
            toggle: true,
            phase_convention: PhaseConvention::default(),
            contrast_integrand: ContrastIntegrand::default(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseUnit {
    /// Field amplitude in pT, converted with the gyromagnetic ratio.
    #[serde(rename = "pT")]
    PicoTesla,
    /// Frequency-equivalent amplitude in Hz.
    #[serde(rename = "Hz")]
    Hz,
    /// Product amplitude·frequency in Hz² (slow drifts).
    #[serde(rename = "Hz2-slow")]
    Hz2Slow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub unit: NoiseUnit,
    pub freq_hz: f64,
    /// Fixed phase in radians; random when absent.
    #[serde(default)]
    pub phase: Option<f64>,
}

impl NoiseSpec {
    pub fn to_component(&self, gyro_hz_per_nt: f64) -> spinlock_core::Result<NoiseComponent> {
        let phase = self.phase.map_or(NoisePhase::Random, NoisePhase::Fixed);
        match self.unit {
            NoiseUnit::PicoTesla => {
                NoiseComponent::from_picotesla(self.amplitude, self.freq_hz, gyro_hz_per_nt, phase)
            }
            NoiseUnit::Hz => NoiseComponent::new(self.amplitude, self.freq_hz, phase),
            NoiseUnit::Hz2Slow => {
                NoiseComponent::from_hz2_slow(self.amplitude, self.freq_hz, phase)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    #[serde(default = "default_gyro")]
    pub gyro_hz_per_nt: f64,
    #[serde(default = "reference_specs")]
    pub components: Vec<NoiseSpec>,
}

fn default_gyro() -> f64 {
    ELECTRON_GYRO_HZ_PER_NT
}

/// 540 pT at 50 Hz, 390 pT at 100 Hz, 40 Hz² drift at 2.1 Hz.
pub fn reference_specs() -> Vec<NoiseSpec> {
    vec![
        NoiseSpec {
            amplitude: 540.0,
            unit: NoiseUnit::PicoTesla,
            freq_hz: 50.0,
            phase: None,
        },
        NoiseSpec {
            amplitude: 390.0,
            unit: NoiseUnit::PicoTesla,
            freq_hz: 100.0,
            phase: None,
        },
        NoiseSpec {
            amplitude: 40.0,
            unit: NoiseUnit::Hz2Slow,
            freq_hz: 2.1,
            phase: None,
        },
    ]
}

impl Default for Noise {
    fn default() -> Self {
        Self {
            gyro_hz_per_nt: default_gyro(),
            components: reference_specs(),
        }
    }
}

impl Noise {
    pub fn components(&self) -> spinlock_core::Result<Vec<NoiseComponent>> {
        self.components
            .iter()
            .map(|c| c.to_component(self.gyro_hz_per_nt))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mc {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl Default for Mc {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bch {
    #[serde(default = "default_bch_size")]
    pub n_photons: usize,
    #[serde(default = "default_bch_size")]
    pub n_atoms: usize,
    #[serde(default = "default_g_tau_grid")]
    pub g_tau_grid: Grid,
}

fn default_bch_size() -> usize {
    4
}

fn default_g_tau_grid() -> Grid {
    Grid::List(vec![1e-3, 2e-3, 5e-3, 1e-2])
}

impl Default for Bch {
    fn default() -> Self {
        Self {
            n_photons: 4,
            n_atoms: 4,
            g_tau_grid: default_g_tau_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oracle {
    /// `[α, β, γ]` triples in radians.
    #[serde(default = "default_oracle_phases")]
    pub phases: Vec<[f64; 3]>,
    #[serde(default = "default_orderings")]
    pub orderings: Vec<spinlock_core::analytic::EvolutionOrdering>,
}

fn default_oracle_phases() -> Vec<[f64; 3]> {
    vec![
        [0.0, 0.3, 0.2],
        [0.01, 0.1, 0.2],
        [0.02, 0.3, 0.1],
        [0.1, 0.5, 0.7],
    ]
}

fn default_orderings() -> Vec<spinlock_core::analytic::EvolutionOrdering> {
    spinlock_core::analytic::EvolutionOrdering::ALL.to_vec()
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            phases: default_oracle_phases(),
            orderings: default_orderings(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preview {
    /// Sample times in ms.
    #[serde(default = "default_preview_times")]
    pub times: Grid,
}

fn default_preview_times() -> Grid {
    Grid::range(0.0, 100.0, 0.1)
}

impl Default for Preview {
    fn default() -> Self {
        Self {
            times: default_preview_times(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Written to stdout when absent.
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub physics: Physics,
    #[serde(default)]
    pub lockin: LockIn,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub mc: Mc,
    #[serde(default)]
    pub bch: Bch,
    #[serde(default)]
    pub oracle: Oracle,
    #[serde(default)]
    pub preview: Preview,
    #[serde(default)]
    pub output: Output,
}

fn default_tau_arm_grid() -> Grid {
    Grid::range(1.0, 25.0, 0.08)
}

fn default_duration_grid() -> Grid {
    Grid::range(20.0, 600.0, 5.0)
}

impl RunConfig {
    /// Defaults for `experiment`: 50 atoms, gτ = 1e-4, reference noise.
    pub fn with_defaults(experiment: Experiment) -> Self {
        let mut cfg = Self {
            experiment,
            physics: Physics {
                n_atoms: 50,
                n_photons: None,
                g: default_g(),
                tau: default_tau(),
                chi_override: None,
                squeeze_duration: None,
                n_atoms_list: None,
                compare_unsqueezed: false,
            },
            lockin: LockIn::default(),
            noise: Noise::default(),
            mc: Mc::default(),
            bch: Bch::default(),
            oracle: Oracle::default(),
            preview: Preview::default(),
            output: Output::default(),
        };
        cfg.resolve();
        cfg
    }

    /// Parses JSON text, fills defaults, and validates.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::from_parse(&e))?;
        cfg.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Single-line form used for hashing and header echo.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Makes every derived default explicit.
    pub fn resolve(&mut self) {
        let p = &mut self.physics;
        p.n_photons.get_or_insert(p.n_atoms);
        if p.chi_override.is_none() {
            p.chi_override = Some(effective_chi(p.g, p.tau, p.n_photons.unwrap_or(p.n_atoms)));
        }
        if p.squeeze_duration.is_none() {
            p.squeeze_duration = Some(4.0 * p.tau);
        }
        if p.n_atoms_list.is_none() {
            p.n_atoms_list = Some(vec![p.n_atoms]);
        }
        let l = &mut self.lockin;
        l.tau_arm_grid.get_or_insert_with(default_tau_arm_grid);
        l.duration_grid.get_or_insert_with(default_duration_grid);
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.physics;
        if p.n_atoms == 0 || p.n_atoms > spinlock_core::spin::MAX_ATOMS {
            return Err(CliError::validation(
                "physics.n_atoms",
                "must be in 1..=10000",
            ));
        }
        if p.n_photons() == 0 {
            return Err(CliError::validation(
                "physics.n_photons",
                "must be positive",
            ));
        }
        if !(p.g > 0.0 && p.g.is_finite()) {
            return Err(CliError::validation("physics.g", "must be positive"));
        }
        if !(p.tau > 0.0 && p.tau.is_finite()) {
            return Err(CliError::validation("physics.tau", "must be positive"));
        }
        if !p.chi().is_finite() || p.chi() < 0.0 {
            return Err(CliError::validation(
                "physics.chi_override",
                "must be finite and >= 0",
            ));
        }
        if !(p.squeeze_duration() >= 0.0 && p.squeeze_duration().is_finite()) {
            return Err(CliError::validation(
                "physics.squeeze_duration",
                "must be >= 0",
            ));
        }
        let atoms = p.atom_numbers();
        if atoms.is_empty() || atoms.contains(&0) {
            return Err(CliError::validation(
                "physics.n_atoms_list",
                "must be a non-empty list of positive atom numbers",
            ));
        }
        let l = &self.lockin;
        if l.n_pulses == 0 {
            return Err(CliError::validation("lockin.n_pulses", "must be positive"));
        }
        if !(l.threshold > 0.0 && l.threshold < 1.0) {
            return Err(CliError::validation(
                "lockin.threshold",
                "must lie in (0, 1)",
            ));
        }
        if let Some(g) = &l.tau_arm_grid {
            g.validate("lockin.tau_arm_grid")?;
            if g.points()[0] <= 0.0 {
                return Err(CliError::validation(
                    "lockin.tau_arm_grid",
                    "arming times must be positive",
                ));
            }
        }
        if let Some(g) = &l.duration_grid {
            g.validate("lockin.duration_grid")?;
            if g.points()[0] <= 0.0 {
                return Err(CliError::validation(
                    "lockin.duration_grid",
                    "durations must be positive",
                ));
            }
        }
        if self.noise.gyro_hz_per_nt.is_nan() || self.noise.gyro_hz_per_nt <= 0.0 {
            return Err(CliError::validation(
                "noise.gyro_hz_per_nt",
                "must be positive",
            ));
        }
        for (i, c) in self.noise.components.iter().enumerate() {
            c.to_component(self.noise.gyro_hz_per_nt).map_err(|e| {
                CliError::validation(&format!("noise.components[{i}]"), &e.to_string())
            })?;
        }
        if self.mc.samples == 0 {
            return Err(CliError::validation("mc.samples", "must be at least 1"));
        }
        self.bch.g_tau_grid.validate("bch.g_tau_grid")?;
        if self.bch.n_atoms == 0 || self.bch.n_photons == 0 {
            return Err(CliError::validation(
                "bch",
                "n_atoms and n_photons must be positive",
            ));
        }
        if self.oracle.phases.is_empty() {
            return Err(CliError::validation("oracle.phases", "must not be empty"));
        }
        if self.oracle.orderings.is_empty() {
            return Err(CliError::validation(
                "oracle.orderings",
                "must not be empty",
            ));
        }
        self.preview.times.validate("preview.times")?;
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    RunConfig::from_json(&text)
}
