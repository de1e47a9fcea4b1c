//! Collective spin of `N` spin-1/2 atoms in the symmetric (Dicke) subspace.
//!
//! Basis convention: index `k = 0..=N` labels `|J, m = J - k⟩` with
//! `J = N/2`, i.e. `m` runs from `+J` down to `-J`. Every operator and
//! state in this crate uses that order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{check_dims, CMatrix, CVector, CollectiveOperator, C64};

/// Largest atom number for which dense `(N+1)²` storage is allowed.
pub const MAX_ATOMS: usize = 10_000;

/// Tolerance on the unit norm of a state.
pub const NORM_TOL: f64 = 1e-12;

/// Rounding allowance for negative variances and imaginary expectation parts.
pub const ROUNDING_TOL: f64 = 1e-10;

/// Angular-momentum matrices `(Jx, Jy, Jz)` for spin `J = two_j / 2`.
pub fn spin_matrices(two_j: usize) -> (CMatrix, CMatrix, CMatrix) {
    let dim = two_j + 1;
    let j = two_j as f64 / 2.0;
    let m_of = |k: usize| j - k as f64;
    let jz = CMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            C64::new(m_of(r), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // J+ |m⟩ = sqrt(J(J+1) - m(m+1)) |m+1⟩, and m+1 sits one index above m.
    let mut jp = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        let m = m_of(k);
        jp[(k - 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).map(|z| z * 0.5);
    let jy = (&jp - &jm).map(|z| z * C64::new(0.0, -0.5));
    (jx, jy, jz)
}

/// `Jx, Jy, Jz, Jz²` for a fixed atom number.
#[derive(Debug, Clone)]
pub struct CollectiveOps {
    pub n_atoms: usize,
    pub jx: CollectiveOperator,
    pub jy: CollectiveOperator,
    pub jz: CollectiveOperator,
    pub jz2: CollectiveOperator,
}

impl CollectiveOps {
    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn get(&self, generator: Generator) -> &CollectiveOperator {
        match generator {
            Generator::Jx => &self.jx,
            Generator::Jy => &self.jy,
            Generator::Jz => &self.jz,
            Generator::Jz2 => &self.jz2,
        }
    }
}

pub fn build_collective_ops(n_atoms: usize) -> Result<CollectiveOps> {
    check_atoms(n_atoms)?;
    let (jx, jy, jz) = spin_matrices(n_atoms);
    let jz2 = &jz * &jz;
    Ok(CollectiveOps {
        n_atoms,
        jx: CollectiveOperator::hermitian(jx)?,
        jy: CollectiveOperator::hermitian(jy)?,
        jz: CollectiveOperator::hermitian(jz)?,
        jz2: CollectiveOperator::hermitian(jz2)?,
    })
}

fn check_atoms(n_atoms: usize) -> Result<()> {
    if n_atoms == 0 || n_atoms > MAX_ATOMS {
        return Err(Error::Config(format!(
            "n_atoms = {n_atoms} outside 1..={MAX_ATOMS}"
        )));
    }
    Ok(())
}

/// Pure state of the ensemble in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    n_atoms: usize,
    amplitudes: CVector,
}

impl DickeState {
    /// Validates length and unit norm.
    pub fn from_amplitudes(n_atoms: usize, amplitudes: CVector) -> Result<Self> {
        check_atoms(n_atoms)?;
        check_dims(n_atoms + 1, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self {
            n_atoms,
            amplitudes,
        })
    }

    /// The Dicke state `|J, m = J - k⟩`.
    pub fn dicke(n_atoms: usize, k: usize) -> Result<Self> {
        check_atoms(n_atoms)?;
        if k > n_atoms {
            return Err(Error::InvalidParameter(format!(
                "Dicke index {k} exceeds {n_atoms}"
            )));
        }
        let mut amplitudes = CVector::zeros(n_atoms + 1);
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self {
            n_atoms,
            amplitudes,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Coherent spin state: every atom in `cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩`.
///
/// The binomial weight is accumulated in log space so large `N` stays finite.
pub fn css_state(n_atoms: usize, theta: f64, phi: f64) -> Result<DickeState> {
    check_atoms(n_atoms)?;
    let n = n_atoms;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut amplitudes = CVector::zeros(n + 1);
    if s == 0.0 {
        amplitudes[0] = C64::new(c.signum(), 0.0).powu(n as u32);
    } else if c == 0.0 {
        amplitudes[n] = C64::from_polar(1.0, n as f64 * phi) * s.signum().powi(n as i32);
    } else {
        let (lc, ls) = (c.abs().ln(), s.abs().ln());
        let mut ln_binom = 0.0;
        for k in 0..=n {
            if k > 0 {
                ln_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            let magnitude = (0.5 * ln_binom + (n - k) as f64 * lc + k as f64 * ls).exp();
            let sign = c.signum().powi((n - k) as i32) * s.signum().powi(k as i32);
            amplitudes[k] = C64::from_polar(magnitude * sign, k as f64 * phi);
        }
        let norm = amplitudes.norm();
        amplitudes.unscale_mut(norm);
    }
    Ok(DickeState {
        n_atoms,
        amplitudes,
    })
}

/// The CSS polarised along +x.
pub fn x_css(n_atoms: usize) -> Result<DickeState> {
    css_state(n_atoms, std::f64::consts::FRAC_PI_2, 0.0)
}

/// `exp(-i · duration_phase · generator) |ψ⟩`.
pub fn evolve_unitary(
    state: &DickeState,
    generator: &CollectiveOperator,
    duration_phase: f64,
) -> Result<DickeState> {
    check_dims(state.dim(), generator.dim())?;
    let u = generator.exp_i(duration_phase)?;
    let amplitudes = u.apply(&state.amplitudes)?;
    Ok(DickeState {
        n_atoms: state.n_atoms,
        amplitudes,
    })
}

/// `⟨ψ|op|ψ⟩` for Hermitian `op`.
pub fn expect(state: &DickeState, op: &CollectiveOperator) -> Result<f64> {
    let (value, _) = expect_with_image(state, op)?;
    Ok(value)
}

fn expect_with_image(state: &DickeState, op: &CollectiveOperator) -> Result<(f64, CVector)> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian(op.hermitian_deviation()));
    }
    let image = op.apply(&state.amplitudes)?;
    let z = state.amplitudes.dotc(&image);
    if z.im.abs() > ROUNDING_TOL * z.re.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "expectation of Hermitian operator has imaginary part {:e}",
            z.im
        )));
    }
    Ok((z.re, image))
}

/// `⟨op²⟩ − ⟨op⟩²`, with rounding-level negatives clamped to zero.
pub fn variance(state: &DickeState, op: &CollectiveOperator) -> Result<f64> {
    let (mean, image) = expect_with_image(state, op)?;
    // ⟨op²⟩ = ‖op ψ‖² for Hermitian op.
    let second = image.norm_squared();
    let var = second - mean * mean;
    if var >= 0.0 {
        Ok(var)
    } else if var > -ROUNDING_TOL * second.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(var))
    }
}

/// Accumulated phases of the lock-in Hamiltonian: squeezing `α = χt`,
/// signal/noise `β = ∫M dt` and drive `γ = ∫Ω dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PhaseTriple {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite phases ({alpha}, {beta}, {gamma})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }
}

/// Generators a schedule step can exponentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    Jx,
    Jy,
    Jz,
    Jz2,
}

/// One step `exp(-i · phase · G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseStep {
    pub generator: Generator,
    pub phase: f64,
}

/// Rotations and free-evolution segments, applied in list order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub steps: Vec<PulseStep>,
}

impl PulseSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(mut self, generator: Generator, phase: f64) -> Self {
        self.steps.push(PulseStep { generator, phase });
        self
    }

    /// One-axis twisting `exp(-iα Jz²)`.
    pub fn twist(self, alpha: f64) -> Self {
        self.step(Generator::Jz2, alpha)
    }

    pub fn rotate_x(self, angle: f64) -> Self {
        self.step(Generator::Jx, angle)
    }

    pub fn rotate_y(self, angle: f64) -> Self {
        self.step(Generator::Jy, angle)
    }

    pub fn rotate_z(self, angle: f64) -> Self {
        self.step(Generator::Jz, angle)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn apply_schedule(
    state: &DickeState,
    ops: &CollectiveOps,
    schedule: &PulseSchedule,
) -> Result<DickeState> {
    schedule.steps.iter().try_fold(state.clone(), |psi, step| {
        evolve_unitary(&psi, ops.get(step.generator), step.phase)
    })
}

/// First and second collective moments of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub jz2: f64,
}

impl Moments {
    pub fn max_abs_diff(&self, other: &Moments) -> f64 {
        [
            self.jx - other.jx,
            self.jy - other.jy,
            self.jz - other.jz,
            self.jz2 - other.jz2,
        ]
        .iter()
        .fold(0.0, |acc, d| acc.max(d.abs()))
    }
}

pub fn moments(state: &DickeState, ops: &CollectiveOps) -> Result<Moments> {
    Ok(Moments {
        jx: expect(state, &ops.jx)?,
        jy: expect(state, &ops.jy)?,
        jz: expect(state, &ops.jz)?,
        jz2: expect(state, &ops.jz2)?,
    })
}

/// Evolves the x-polarised CSS through `schedule` in the Dicke basis.
pub fn dicke_schedule_moments(n_atoms: usize, schedule: &PulseSchedule) -> Result<Moments> {
    let ops = build_collective_ops(n_atoms)?;
    let psi = apply_schedule(&x_css(n_atoms)?, &ops, schedule)?;
    moments(&psi, &ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn commutator_residual(ops: &CollectiveOps) -> f64 {
        let a = ops.jx.entries();
        let b = ops.jy.entries();
        let c = ops.jz.entries();
        let i = C64::new(0.0, 1.0);
        let r1 = a * b - b * a - c.map(|z| z * i);
        let r2 = b * c - c * b - a.map(|z| z * i);
        let r3 = c * a - a * c - b.map(|z| z * i);
        crate::operator::max_abs(&r1)
            .max(crate::operator::max_abs(&r2))
            .max(crate::operator::max_abs(&r3))
    }

    #[test]
    fn single_spin_jz() {
        let ops = build_collective_ops(1).unwrap();
        assert_eq!(ops.jz.entries()[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(ops.jz.entries()[(1, 1)], C64::new(-0.5, 0.0));
    }

    #[test]
    fn two_spin_jz2_diagonal() {
        let ops = build_collective_ops(2).unwrap();
        let d: Vec<f64> = (0..3).map(|k| ops.jz2.entries()[(k, k)].re).collect();
        assert_eq!(d, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn su2_algebra_small() {
        for n in 1..=20 {
            let ops = build_collective_ops(n).unwrap();
            assert!(commutator_residual(&ops) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn atom_count_bounds() {
        assert!(matches!(build_collective_ops(0), Err(Error::Config(_))));
        assert!(matches!(
            build_collective_ops(MAX_ATOMS + 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn css_examples() {
        let s = css_state(1, FRAC_PI_2, 0.0).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);

        let up = css_state(2, 0.0, 0.0).unwrap();
        assert_eq!(up.amplitudes()[0], C64::new(1.0, 0.0));
        assert_eq!(up.amplitudes()[1], C64::new(0.0, 0.0));
        assert_eq!(up.amplitudes()[2], C64::new(0.0, 0.0));

        let ops = build_collective_ops(50).unwrap();
        let x = x_css(50).unwrap();
        assert!(expect(&x, &ops.jz).unwrap().abs() < 1e-12);
        assert!((expect(&x, &ops.jz2).unwrap() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn css_south_pole_and_large_n() {
        let down = css_state(3, std::f64::consts::PI, 0.3).unwrap();
        assert!((down.amplitudes()[3].norm() - 1.0).abs() < 1e-15);
        let big = x_css(2000).unwrap();
        assert!((big.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn css_matches_binomial_formula() {
        let (n, theta, phi) = (5usize, 1.1f64, -0.4f64);
        let s = css_state(n, theta, phi).unwrap();
        let binom: [f64; 6] = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
        for k in 0..=n {
            let expected = C64::from_polar(
                f64::sqrt(binom[k])
                    * (theta / 2.0).cos().powi((n - k) as i32)
                    * (theta / 2.0).sin().powi(k as i32),
                k as f64 * phi,
            );
            assert!((s.amplitudes()[k] - expected).norm() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn evolution_zero_phase_is_identity() {
        let ops = build_collective_ops(4).unwrap();
        let psi = css_state(4, 0.7, 0.2).unwrap();
        let out = evolve_unitary(&psi, &ops.jz, 0.0).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn z_rotation_of_three_spins() {
        // Each spin rotates independently: ⟨σx⟩ = cos β per atom.
        let ops = build_collective_ops(3).unwrap();
        let psi = evolve_unitary(&x_css(3).unwrap(), &ops.jz, 0.3).unwrap();
        assert!((expect(&psi, &ops.jx).unwrap() - 1.5 * 0.3f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn x_css_moments() {
        for n in [1, 2, 7, 50] {
            let ops = build_collective_ops(n).unwrap();
            let x = x_css(n).unwrap();
            let m = moments(&x, &ops).unwrap();
            let nf = n as f64;
            assert!((m.jx - nf / 2.0).abs() < 1e-12);
            assert!(m.jy.abs() < 1e-12);
            assert!(m.jz.abs() < 1e-12);
            assert!((m.jz2 - nf / 4.0).abs() < 1e-12);
            assert!((variance(&x, &ops.jz).unwrap() - nf / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenstate_has_zero_variance() {
        let ops = build_collective_ops(6).unwrap();
        let top = DickeState::dicke(6, 0).unwrap();
        assert_eq!(variance(&top, &ops.jz).unwrap(), 0.0);
    }

    #[test]
    fn twisting_leaves_jz_statistics() {
        let ops = build_collective_ops(10).unwrap();
        let x = x_css(10).unwrap();
        for alpha in [0.01, 0.3, 1.7] {
            let sq = evolve_unitary(&x, &ops.jz2, alpha).unwrap();
            assert!(expect(&sq, &ops.jz).unwrap().abs() < 1e-12);
            assert!((variance(&sq, &ops.jz).unwrap() - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let ops = build_collective_ops(3).unwrap();
        let x = x_css(4).unwrap();
        assert!(matches!(
            expect(&x, &ops.jx),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            evolve_unitary(&x, &ops.jz, 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_unit_state_rejected() {
        let v = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(DickeState::from_amplitudes(1, v).is_err());
    }
}
