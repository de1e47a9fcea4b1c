//! Dense complex operators on small Hilbert spaces.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance used to validate the Hermitian flag at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense `dim x dim` complex matrix, tagged Hermitian when it was
/// verified to equal its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOperator {
    entries: CMatrix,
    hermitian: bool,
}

impl CollectiveOperator {
    /// Wraps a matrix and checks it against its adjoint.
    pub fn hermitian(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        let dev = hermitian_deviation(&entries);
        if dev >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self {
            entries,
            hermitian: true,
        })
    }

    /// Wraps a matrix without any structural claim (unitaries, products).
    pub fn general(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        Ok(Self {
            entries,
            hermitian: false,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.entries)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// Matrix product `self * rhs`. Hermiticity is not preserved in general.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(Self {
            entries: &self.entries * &rhs.entries,
            hermitian: false,
        })
    }

    /// Kronecker product `self ⊗ rhs`; `self` indexes the slow (major) factor.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self {
            entries: self.entries.kronecker(&rhs.entries),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * factor),
            hermitian: self.hermitian,
        }
    }

    /// Real linear combination `Σ c_k · op_k`; Hermitian if every term is.
    pub fn linear_combination(terms: &[(f64, &CollectiveOperator)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty linear combination".into()))?;
        let dim = first.1.dim();
        let mut entries = CMatrix::zeros(dim, dim);
        let mut hermitian = true;
        for (c, op) in terms {
            check_dims(dim, op.dim())?;
            entries += op.entries.map(|z| z * *c);
            hermitian &= op.hermitian;
        }
        Ok(Self { entries, hermitian })
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        check_dims(self.dim(), v.len())?;
        Ok(&self.entries * v)
    }

    /// `exp(-i · phase · self)` via eigendecomposition of the Hermitian generator.
    pub fn exp_i(&self, phase: f64) -> Result<Self> {
        if !self.hermitian {
            return Err(Error::NotHermitian(self.hermitian_deviation()));
        }
        Ok(Self {
            entries: expm_hermitian(&self.entries, phase),
            hermitian: false,
        })
    }

    /// Operator-norm distance of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        let prod = self.entries.adjoint() * &self.entries - CMatrix::identity(dim, dim);
        operator_norm(&prod)
    }

    /// Max entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        max_abs(&(&self.entries - &rhs.entries))
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(-i · phase · h)` for Hermitian `h`.
pub fn expm_hermitian(h: &CMatrix, phase: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let w = C64::from_polar(1.0, -phase * lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= w;
        }
    }
    scaled * v.adjoint()
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}
