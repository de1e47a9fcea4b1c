//! Closed-form lock-in expectations and phase resolution, evaluated exactly
//! as written in their published form, plus the exact-evolution comparison
//! that measures how far they sit from the Dicke-basis result.
//!
//! For `α ≠ 0` the closed forms are not expected to agree with exact
//! evolution: the `sin^{N-1}α` terms come from an average of `sin(αJz')`
//! that vanishes on the x-polarised CSS. The comparison functions report
//! that gap rather than hide it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::CollectiveOperator;
use crate::spin::{
    apply_schedule, build_collective_ops, evolve_unitary, expect, variance, x_css, CollectiveOps,
    PhaseTriple, PulseSchedule,
};

/// Threshold on the phase-resolution denominator.
pub const FRINGE_NODE_TOL: f64 = 1e-12;

/// Rounding allowance on the phase-resolution radicand.
pub const RADICAND_TOL: f64 = 1e-12;

/// `x^n` for integer `n`, keeping the sign of `x`.
pub fn signed_power(x: f64, n: usize) -> f64 {
    x.powi(n as i32)
}

/// `(cos^{N-1}α, sin^{N-1}α)`. The sine factor stands for the average of
/// `sin(α·Jz')` over the other `N-1` atoms, so with no other atoms it is 0,
/// not `0^0`.
fn trig_powers(alpha: f64, n_atoms: usize) -> (f64, f64) {
    let k = n_atoms.saturating_sub(1);
    let sine = if k == 0 {
        0.0
    } else {
        signed_power(alpha.sin(), k)
    };
    (signed_power(alpha.cos(), k), sine)
}

/// `(N/2)·cos^{N-1}α·cosβ − (N/2)·sin^{N-1}α·sinβ`.
pub fn expect_jx(phases: &PhaseTriple, n_atoms: usize) -> f64 {
    let half = n_atoms as f64 / 2.0;
    let (c, s) = trig_powers(phases.alpha, n_atoms);
    half * c * phases.beta.cos() - half * s * phases.beta.sin()
}

/// `(N/2)·[cos^{N-1}α·sinβ + sin^{N-1}α·cosβ]·sinγ`.
pub fn expect_jz(phases: &PhaseTriple, n_atoms: usize) -> f64 {
    let half = n_atoms as f64 / 2.0;
    let (c, s) = trig_powers(phases.alpha, n_atoms);
    half * (c * phases.beta.sin() + s * phases.beta.cos()) * phases.gamma.sin()
}

/// Minimal detectable phase from the closed-form moments.
pub fn min_detectable_phase(phases: &PhaseTriple, n_atoms: usize) -> Result<f64> {
    if n_atoms == 0 {
        return Err(Error::InvalidParameter("n_atoms must be positive".into()));
    }
    let (c, s) = trig_powers(phases.alpha, n_atoms);
    let (sb, cb) = phases.beta.sin_cos();
    let sg = phases.gamma.sin();
    let denominator = cb * c - sb * s;
    if denominator.abs() <= FRINGE_NODE_TOL {
        return Err(Error::FringeNode(denominator));
    }
    let shift = c * sb * sg + s * cb * sg;
    let mut radicand = 1.0 / n_atoms as f64 - shift * shift;
    if radicand < 0.0 {
        if radicand >= -RADICAND_TOL {
            radicand = 0.0;
        } else {
            return Err(Error::Domain(format!(
                "negative radicand {radicand:e} in phase resolution"
            )));
        }
    }
    Ok(radicand.sqrt() / denominator)
}

/// Standard quantum limit `1/√N`.
pub fn sql_phase(n_atoms: usize) -> f64 {
    (n_atoms as f64).sqrt().recip()
}

/// How the three phases are combined into one evolution for the exact
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionOrdering {
    /// `exp(-iγJx)·exp(-iβJz)·exp(-iαJz²)`: squeeze, accumulate, drive.
    #[default]
    SqueezeSignalDrive,
    /// `exp(-iαJz²)·exp(-iβJz)·exp(-iγJx)`.
    DriveSignalSqueeze,
    /// `exp(-i(αJz² + βJz + γJx))`.
    Joint,
}

impl EvolutionOrdering {
    pub const ALL: [EvolutionOrdering; 3] = [
        EvolutionOrdering::SqueezeSignalDrive,
        EvolutionOrdering::DriveSignalSqueeze,
        EvolutionOrdering::Joint,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EvolutionOrdering::SqueezeSignalDrive => "squeeze-signal-drive",
            EvolutionOrdering::DriveSignalSqueeze => "drive-signal-squeeze",
            EvolutionOrdering::Joint => "joint",
        }
    }
}

/// Exact moments after evolving the x-polarised CSS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleMoments {
    pub jx: f64,
    pub jz: f64,
    pub jz2: f64,
    pub var_jz: f64,
}

impl OracleMoments {
    /// `sqrt(Var Jz) / ⟨Jx⟩`.
    pub fn min_detectable_phase(&self) -> f64 {
        self.var_jz.sqrt() / self.jx
    }
}

pub fn oracle_moments_with(
    ops: &CollectiveOps,
    phases: &PhaseTriple,
    ordering: EvolutionOrdering,
) -> Result<OracleMoments> {
    let psi0 = x_css(ops.n_atoms)?;
    let psi = match ordering {
        EvolutionOrdering::SqueezeSignalDrive => {
            let schedule = PulseSchedule::new()
                .twist(phases.alpha)
                .rotate_z(phases.beta)
                .rotate_x(phases.gamma);
            apply_schedule(&psi0, ops, &schedule)?
        }
        EvolutionOrdering::DriveSignalSqueeze => {
            let schedule = PulseSchedule::new()
                .rotate_x(phases.gamma)
                .rotate_z(phases.beta)
                .twist(phases.alpha);
            apply_schedule(&psi0, ops, &schedule)?
        }
        EvolutionOrdering::Joint => {
            let h = CollectiveOperator::linear_combination(&[
                (phases.alpha, &ops.jz2),
                (phases.beta, &ops.jz),
                (phases.gamma, &ops.jx),
            ])?;
            evolve_unitary(&psi0, &h, 1.0)?
        }
    };
    Ok(OracleMoments {
        jx: expect(&psi, &ops.jx)?,
        jz: expect(&psi, &ops.jz)?,
        jz2: expect(&psi, &ops.jz2)?,
        var_jz: variance(&psi, &ops.jz)?,
    })
}

pub fn oracle_moments(
    phases: &PhaseTriple,
    n_atoms: usize,
    ordering: EvolutionOrdering,
) -> Result<OracleMoments> {
    let ops = build_collective_ops(n_atoms)?;
    oracle_moments_with(&ops, phases, ordering)
}

/// Closed form next to exact evolution for one phase triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub jx_analytic: f64,
    pub jx_oracle: f64,
    pub jz_analytic: f64,
    pub jz_oracle: f64,
    /// `None` at a fringe node of the closed form.
    pub dphi_analytic: Option<f64>,
    pub dphi_oracle: f64,
}

impl Discrepancy {
    pub fn jx_residual(&self) -> f64 {
        (self.jx_analytic - self.jx_oracle).abs()
    }

    pub fn jz_residual(&self) -> f64 {
        (self.jz_analytic - self.jz_oracle).abs()
    }
}

pub fn discrepancy(
    phases: &PhaseTriple,
    n_atoms: usize,
    ordering: EvolutionOrdering,
) -> Result<Discrepancy> {
    let oracle = oracle_moments(phases, n_atoms, ordering)?;
    let dphi_analytic = match min_detectable_phase(phases, n_atoms) {
        Ok(v) => Some(v),
        Err(Error::FringeNode(_)) | Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(Discrepancy {
        jx_analytic: expect_jx(phases, n_atoms),
        jx_oracle: oracle.jx,
        jz_analytic: expect_jz(phases, n_atoms),
        jz_oracle: oracle.jz,
        dphi_analytic,
        dphi_oracle: oracle.min_detectable_phase(),
    })
}
