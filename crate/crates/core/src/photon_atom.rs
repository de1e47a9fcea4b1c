//! Photon–atom squeezing sequence.
//!
//! The probe light is a two-mode field restricted to fixed total photon
//! number `N_s`, which carries a spin-`N_s/2` representation of the Stokes
//! operators. Four `π/2` Stokes rotations interleaved with Faraday free
//! evolution `exp(-i gτ Sz⊗Jz)` reduce, to second order in `gτ`, to the
//! twisting generator `Sx⊗Jz²`. The joint space is photon-major: index
//! `p · (N_a + 1) + a`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{operator_norm, CMatrix, CVector, CollectiveOperator, C64};
use crate::spin::{build_collective_ops, spin_matrices};

pub const MAX_PHOTONS: usize = 200;

/// Dense joint dimension above which the sequence refuses to build.
pub const MAX_JOINT_DIM: usize = 10_000;

/// Stokes operators of the fixed-photon-number sector.
#[derive(Debug, Clone)]
pub struct StokesOps {
    pub n_photons: usize,
    pub sx: CollectiveOperator,
    pub sy: CollectiveOperator,
    pub sz: CollectiveOperator,
}

pub fn build_stokes_ops(n_photons: usize) -> Result<StokesOps> {
    if n_photons == 0 || n_photons > MAX_PHOTONS {
        return Err(Error::Config(format!(
            "n_photons = {n_photons} outside 1..={MAX_PHOTONS}"
        )));
    }
    let (sx, sy, sz) = spin_matrices(n_photons);
    Ok(StokesOps {
        n_photons,
        sx: CollectiveOperator::hermitian(sx)?,
        sy: CollectiveOperator::hermitian(sy)?,
        sz: CollectiveOperator::hermitian(sz)?,
    })
}

/// Photon ⊗ atom state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    photon_dim: usize,
    atom_dim: usize,
    amplitudes: CVector,
}

impl JointState {
    pub fn product(photon: &CVector, atom: &CVector) -> Result<Self> {
        let amplitudes = photon.kronecker(atom);
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("joint state norm {norm} is not 1")));
        }
        Ok(Self {
            photon_dim: photon.len(),
            atom_dim: atom.len(),
            amplitudes,
        })
    }

    pub fn photon_dim(&self) -> usize {
        self.photon_dim
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn evolve(&self, u: &CollectiveOperator) -> Result<Self> {
        Ok(Self {
            amplitudes: u.apply(&self.amplitudes)?,
            ..self.clone()
        })
    }
}

/// Coupling `g`, free-evolution interval `τ`, and the effective twisting
/// strength `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    pub g: f64,
    pub tau: f64,
    pub chi: f64,
}

impl SqueezeParams {
    /// Derives `χ = N_s g² τ / 8`.
    pub fn derived(g: f64, tau: f64, n_photons: usize) -> Self {
        Self {
            g,
            tau,
            chi: effective_chi(g, tau, n_photons),
        }
    }

    pub fn g_tau(&self) -> f64 {
        self.g * self.tau
    }
}

pub fn effective_chi(g: f64, tau: f64, n_photons: usize) -> f64 {
    n_photons as f64 * g * g * tau / 8.0
}

fn check_joint(n_photons: usize, n_atoms: usize) -> Result<()> {
    let dim = (n_photons + 1) * (n_atoms + 1);
    if dim > MAX_JOINT_DIM {
        return Err(Error::Config(format!(
            "joint dimension {dim} exceeds {MAX_JOINT_DIM}"
        )));
    }
    Ok(())
}

/// `[R_S(π/2) · U(τ)]⁴` with `R_S = exp(-i π/2 Sx ⊗ 1)` and
/// `U = exp(-i gτ Sz ⊗ Jz)`.
pub fn u4_sequence(
    params: &SqueezeParams,
    n_photons: usize,
    n_atoms: usize,
) -> Result<CollectiveOperator> {
    check_joint(n_photons, n_atoms)?;
    let stokes = build_stokes_ops(n_photons)?;
    let atoms = build_collective_ops(n_atoms)?;
    let atom_id = CollectiveOperator::identity(n_atoms + 1);
    let pulse = stokes.sx.exp_i(FRAC_PI_2)?.kron(&atom_id);
    let free = stokes.sz.kron(&atoms.jz).exp_i(params.g_tau())?;
    let step = pulse.matmul(&free)?;
    let twice = step.matmul(&step)?;
    twice.matmul(&twice)
}

/// `exp(-i (gτ)² Sx ⊗ Jz²)`, the leading BCH term of the sequence.
pub fn effective_unitary(
    params: &SqueezeParams,
    n_photons: usize,
    n_atoms: usize,
) -> Result<CollectiveOperator> {
    check_joint(n_photons, n_atoms)?;
    let stokes = build_stokes_ops(n_photons)?;
    let atoms = build_collective_ops(n_atoms)?;
    let gt = params.g_tau();
    stokes.sx.kron(&atoms.jz2).exp_i(gt * gt)
}

/// Operator norm of `a - e^{iφ} b`, with `φ` chosen so the largest-modulus
/// entry of `b` is matched in phase by `a`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (mut best, mut idx) = (0.0, (0, 0));
    for r in 0..b.nrows() {
        for c in 0..b.ncols() {
            let m = b[(r, c)].norm();
            if m > best {
                best = m;
                idx = (r, c);
            }
        }
    }
    let ratio = a[idx] / b[idx];
    let phase = if ratio.norm() > 0.0 {
        ratio / ratio.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    operator_norm(&(a - b.map(|z| z * phase)))
}

/// Worst-case distance between the four-pulse sequence and its leading-order
/// effective unitary, after removing the global phase.
pub fn bch_error(params: &SqueezeParams, n_photons: usize, n_atoms: usize) -> Result<f64> {
    let u4 = u4_sequence(params, n_photons, n_atoms)?;
    let eff = effective_unitary(params, n_photons, n_atoms)?;
    Ok(phase_aligned_distance(u4.entries(), eff.entries()))
}

/// Eigenvector of `Sx` with the largest eigenvalue `N_s/2`.
pub fn max_sx_state(stokes: &StokesOps) -> (f64, CVector) {
    let eig = SymmetricEigen::new(stokes.sx.entries().clone());
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    (lambda, eig.eigenvectors.column(k).into_owned())
}

/// Atomic block `⟨+x|_S U₄ |+x⟩_S` of the sequence with the photons in the
/// maximal-`Sx` state.
pub fn induced_atomic_map(
    params: &SqueezeParams,
    n_photons: usize,
    n_atoms: usize,
) -> Result<CMatrix> {
    let u4 = u4_sequence(params, n_photons, n_atoms)?;
    let stokes = build_stokes_ops(n_photons)?;
    let (_, photon) = max_sx_state(&stokes);
    let da = n_atoms + 1;
    let mut block = CMatrix::zeros(da, da);
    let u = u4.entries();
    for p in 0..=n_photons {
        for q in 0..=n_photons {
            let w = photon[p].conj() * photon[q];
            if w.norm() == 0.0 {
                continue;
            }
            block += u.view((p * da, q * da), (da, da)).map(|z| z * w);
        }
    }
    Ok(block)
}

/// Distance between the induced atomic map and one-axis twisting
/// `exp(-i χ · 4τ · Jz²)` with `χ = N_s g²τ/8`.
pub fn atomic_map_error(params: &SqueezeParams, n_photons: usize, n_atoms: usize) -> Result<f64> {
    let block = induced_atomic_map(params, n_photons, n_atoms)?;
    let chi = effective_chi(params.g, params.tau, n_photons);
    let oat = build_collective_ops(n_atoms)?
        .jz2
        .exp_i(chi * 4.0 * params.tau)?;
    Ok(phase_aligned_distance(&block, oat.entries()))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "slope fit needs at least two points".into(),
        ));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Domain("log-log fit needs positive data".into()));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gt: f64) -> SqueezeParams {
        SqueezeParams::derived(1.0, gt, 4)
    }

    #[test]
    fn single_photon_is_spin_half() {
        let s = build_stokes_ops(1).unwrap();
        assert_eq!(s.sz.entries()[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(s.sx.entries()[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(s.sy.entries()[(0, 1)], C64::new(0.0, -0.5));
    }

    #[test]
    fn max_sx_eigenvalue() {
        for n in [1, 2, 5, 17, 50] {
            let s = build_stokes_ops(n).unwrap();
            let (lambda, _) = max_sx_state(&s);
            assert!((lambda - n as f64 / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn photon_bounds() {
        assert!(build_stokes_ops(0).is_err());
        assert!(build_stokes_ops(MAX_PHOTONS + 1).is_err());
        assert!(u4_sequence(&params(0.01), 200, 200).is_err());
    }

    #[test]
    fn zero_coupling_is_full_turn() {
        for (ns, na) in [(1, 2), (2, 2), (3, 1)] {
            let u4 = u4_sequence(&SqueezeParams::derived(1.0, 0.0, ns), ns, na).unwrap();
            let sign = if ns % 2 == 0 { 1.0 } else { -1.0 };
            let dim = (ns + 1) * (na + 1);
            let expected = CMatrix::identity(dim, dim).map(|z| z * sign);
            assert!(crate::operator::max_abs(&(u4.entries() - expected)) < 1e-12);
            let e = bch_error(&SqueezeParams::derived(1.0, 0.0, ns), ns, na).unwrap();
            assert!(e < 1e-12);
        }
    }

    #[test]
    fn sequence_is_unitary() {
        let p = SqueezeParams::derived(1.0, 1e-3, 2);
        assert!(u4_sequence(&p, 2, 2).unwrap().unitarity_defect() < 1e-12);
        assert!(effective_unitary(&p, 2, 2).unwrap().unitarity_defect() < 1e-12);
    }

    #[test]
    fn effective_zero_coupling_is_identity() {
        let e = effective_unitary(&params(0.0), 3, 3).unwrap();
        let dim = 16;
        assert!(crate::operator::max_abs(&(e.entries() - CMatrix::identity(dim, dim))) < 1e-14);
    }

    #[test]
    fn small_system_remainder_bound() {
        let e = bch_error(&SqueezeParams::derived(1.0, 1e-2, 2), 2, 2).unwrap();
        assert!(e < 1e-4, "error {e}");
    }

    #[test]
    fn chi_at_reference_values() {
        // N_s = 50, τ = 1e-4 / g gives χ = 6.25e-4 g.
        let g = 3.0;
        let p = SqueezeParams::derived(g, 1e-4 / g, 50);
        assert!((p.chi / g - 6.25e-4).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 5.0]
            .iter()
            .map(|&x| (x, 7.0 * x * x * x))
            .collect();
        assert!((log_log_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_err());
    }
}
