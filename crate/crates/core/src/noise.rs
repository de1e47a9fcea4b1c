//! Discrete magnetic-noise spectra, the lock-in π-pulse schedule, and the
//! phase the noise imprints on the spins between pulses.
//!
//! Noise amplitudes are frequency-equivalent (Hz): the Zeeman shift the
//! field produces. The accumulated phase is evaluated in closed form, one
//! sine difference per component per inter-pulse interval.

use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electron gyromagnetic ratio, 2.8 MHz/G.
pub const ELECTRON_GYRO_HZ_PER_NT: f64 = 28.0;

/// Phase of one noise component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoisePhase {
    /// Fixed phase in radians.
    Fixed(f64),
    /// Drawn uniformly from `[0, 2π)` for every Monte-Carlo sample.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseComponent {
    pub amplitude_hz: f64,
    pub freq_hz: f64,
    pub phase: NoisePhase,
}

impl NoiseComponent {
    pub fn new(amplitude_hz: f64, freq_hz: f64, phase: NoisePhase) -> Result<Self> {
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise frequency must be positive, got {freq_hz}"
            )));
        }
        if !(amplitude_hz >= 0.0 && amplitude_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise amplitude must be non-negative, got {amplitude_hz}"
            )));
        }
        Ok(Self {
            amplitude_hz,
            freq_hz,
            phase,
        })
    }

    /// A component given as a field amplitude in pT.
    pub fn from_picotesla(
        field_pt: f64,
        freq_hz: f64,
        gyro_hz_per_nt: f64,
        phase: NoisePhase,
    ) -> Result<Self> {
        Self::new(field_pt * 1e-3 * gyro_hz_per_nt, freq_hz, phase)
    }

    /// A slow component given as the product `amplitude · frequency` in Hz².
    pub fn from_hz2_slow(product_hz2: f64, freq_hz: f64, phase: NoisePhase) -> Result<Self> {
        Self::new(product_hz2 / freq_hz, freq_hz, phase)
    }
}

/// The three-component test spectrum: 540 pT at 50 Hz, 390 pT at 100 Hz,
/// and a 2.1 Hz drift with amplitude·frequency = 40 Hz².
pub fn reference_noise(gyro_hz_per_nt: f64) -> Vec<NoiseComponent> {
    vec![
        NoiseComponent::from_picotesla(540.0, 50.0, gyro_hz_per_nt, NoisePhase::Random)
            .expect("valid reference component"),
        NoiseComponent::from_picotesla(390.0, 100.0, gyro_hz_per_nt, NoisePhase::Random)
            .expect("valid reference component"),
        NoiseComponent::from_hz2_slow(40.0, 2.1, NoisePhase::Random)
            .expect("valid reference component"),
    ]
}

fn check_phases(components: &[NoiseComponent], theta: &[f64]) -> Result<()> {
    if components.len() != theta.len() {
        return Err(Error::LengthMismatch {
            what: "theta",
            expected: components.len(),
            actual: theta.len(),
        });
    }
    Ok(())
}

/// `N(t) = Σ_k A_k cos(θ_k + 2π f_k t)` in Hz.
pub fn synth_noise(components: &[NoiseComponent], theta: &[f64], t: f64) -> Result<f64> {
    check_phases(components, theta)?;
    Ok(components.iter().zip(theta).fold(0.0, |acc, (c, th)| {
        acc + c.amplitude_hz * (th + TAU * c.freq_hz * t).cos()
    }))
}

/// How a frequency-equivalent amplitude in Hz becomes a phase rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhaseConvention {
    /// The amplitude is used directly as the rate in rad/s, so a component
    /// contributes `A/(2πf)·sin(θ + 2πft)`.
    #[default]
    Printed,
    /// The amplitude is a cyclic frequency; the rate is `2π·A` rad/s.
    Angular,
}

impl PhaseConvention {
    pub fn rate_factor(self) -> f64 {
        match self {
            PhaseConvention::Printed => 1.0,
            PhaseConvention::Angular => TAU,
        }
    }
}

/// Antiderivative phase `Σ_k c·A_k/(2πf_k)·sin(θ_k + 2πf_k t)`, where `c` is
/// the convention's rate factor. No lower-limit term.
pub fn indefinite_phase(
    components: &[NoiseComponent],
    theta: &[f64],
    t: f64,
    convention: PhaseConvention,
) -> Result<f64> {
    check_phases(components, theta)?;
    let c = convention.rate_factor();
    Ok(components
        .iter()
        .zip(theta)
        .map(|(k, th)| c * k.amplitude_hz / (TAU * k.freq_hz) * (th + TAU * k.freq_hz * t).sin())
        .sum())
}

/// `N` equally spaced π pulses at `m·τ_arm`, `m = 1..=N`, inside the window
/// `[0, (N+1)·τ_arm]`. `bracket` marks the opening and closing π/2 pulses,
/// which are instantaneous and do not change the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockInSchedule {
    pub n_pulses: usize,
    pub tau_arm: f64,
    pub bracket: bool,
}

impl LockInSchedule {
    pub fn new(n_pulses: usize, tau_arm: f64) -> Result<Self> {
        if n_pulses == 0 {
            return Err(Error::InvalidParameter("n_pulses must be positive".into()));
        }
        if !(tau_arm > 0.0 && tau_arm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau_arm must be positive, got {tau_arm}"
            )));
        }
        Ok(Self {
            n_pulses,
            tau_arm,
            bracket: true,
        })
    }

    /// Schedule whose window has length `duration`.
    pub fn for_duration(n_pulses: usize, duration: f64) -> Result<Self> {
        Self::new(n_pulses, duration / (n_pulses as f64 + 1.0))
    }

    pub fn total_duration(&self) -> f64 {
        (self.n_pulses as f64 + 1.0) * self.tau_arm
    }

    /// Time with the field coupled to the spins between the first and last
    /// π pulse, `N·τ_arm`.
    pub fn coherent_time(&self) -> f64 {
        self.n_pulses as f64 * self.tau_arm
    }

    pub fn pulse_times(&self) -> Vec<f64> {
        (1..=self.n_pulses)
            .map(|m| m as f64 * self.tau_arm)
            .collect()
    }

    /// Drive area `γ` of the π-pulse train.
    pub fn drive_area(&self) -> f64 {
        self.n_pulses as f64 * PI
    }

    /// Interval boundaries `0, τ, 2τ, …, (N+1)τ`.
    fn boundaries(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_pulses + 1).map(move |j| j as f64 * self.tau_arm)
    }
}

/// Sign with which the field couples at time `t`: `+1` before the first π
/// pulse, flipping at every pulse. At a pulse time the post-pulse sign is
/// returned.
pub fn toggling_function(schedule: &LockInSchedule, t: f64) -> Result<f64> {
    let total = schedule.total_duration();
    if !(0.0..=total).contains(&t) {
        return Err(Error::OutsideWindow { t, total });
    }
    let flips = ((t / schedule.tau_arm).floor() as usize).min(schedule.n_pulses);
    Ok(if flips.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// Whether the π-pulse toggling weights the accumulated phase, and which
/// rate convention turns Hz into rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accumulation {
    pub toggle: bool,
    pub convention: PhaseConvention,
}

impl Default for Accumulation {
    fn default() -> Self {
        Self {
            toggle: true,
            convention: PhaseConvention::Printed,
        }
    }
}

/// Phase accumulated over the sequence window,
/// `β = c·∫₀^T N(t)·s(t) dt`, summed interval by interval in closed form.
pub fn accumulated_beta(
    components: &[NoiseComponent],
    theta: &[f64],
    schedule: &LockInSchedule,
    accumulation: Accumulation,
) -> Result<f64> {
    check_phases(components, theta)?;
    let c = accumulation.convention.rate_factor();
    let edges: Vec<f64> = schedule.boundaries().collect();
    let mut beta = 0.0;
    for (k, th) in components.iter().zip(theta) {
        let w = TAU * k.freq_hz;
        let mut sum = 0.0;
        for (j, pair) in edges.windows(2).enumerate() {
            let sign = if accumulation.toggle && j % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            sum += sign * ((th + w * pair[1]).sin() - (th + w * pair[0]).sin());
        }
        beta += c * k.amplitude_hz / w * sum;
    }
    Ok(beta)
}

/// Per-component response of the accumulated phase to its noise phase:
/// `β = Σ_k Im(e^{iθ_k} · z_k)`. Precomputed once per schedule so each
/// Monte-Carlo sample costs one complex rotation per component.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseKernel {
    responses: Vec<Complex<f64>>,
}

impl PhaseKernel {
    pub fn new(
        components: &[NoiseComponent],
        schedule: &LockInSchedule,
        accumulation: Accumulation,
    ) -> Self {
        let c = accumulation.convention.rate_factor();
        let edges: Vec<f64> = schedule.boundaries().collect();
        let responses = components
            .iter()
            .map(|k| {
                let w = TAU * k.freq_hz;
                let z: Complex<f64> = edges
                    .windows(2)
                    .enumerate()
                    .map(|(j, pair)| {
                        let sign = if accumulation.toggle && j % 2 == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        (Complex::cis(w * pair[1]) - Complex::cis(w * pair[0])) * sign
                    })
                    .sum();
                z * (c * k.amplitude_hz / w)
            })
            .collect();
        Self { responses }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// Peak phase `|z_k|` each component can imprint.
    pub fn peak_phases(&self) -> Vec<f64> {
        self.responses.iter().map(|z| z.norm()).collect()
    }

    pub fn beta(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.responses.len() {
            return Err(Error::LengthMismatch {
                what: "theta",
                expected: self.responses.len(),
                actual: theta.len(),
            });
        }
        Ok(self
            .responses
            .iter()
            .zip(theta)
            .map(|(z, th)| (Complex::cis(*th) * z).im)
            .sum())
    }
}
