use super::{hermiticity_deviation, CMatrix, CVector, C64};
use crate::error::{Error, Result};

/// Tolerance on Hermiticity, unit trace and positivity of a density matrix.
const STATE_TOL: f64 = 1e-10;

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let herm = hermiticity_deviation(&matrix);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = min_eigenvalue(&matrix);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a unit-norm `ψ`.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "state vector norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            matrix: psi * psi.adjoint(),
        })
    }

    /// Projector onto the computational basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `⟨ψ|ρ|ψ⟩`, real up to rounding.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// An operator flattened row-major into a vector of length `dim²`, carrying
/// the Hilbert–Schmidt inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleVector {
    dim: usize,
    coords: CVector,
}

impl LiouvilleVector {
    pub fn from_operator(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let coords = CVector::from_fn(dim * dim, |k, _| m[(k / dim, k % dim)]);
        Self { dim, coords }
    }

    pub fn from_coords(dim: usize, coords: CVector) -> Result<Self> {
        if coords.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: coords.len(),
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &CVector {
        &self.coords
    }

    pub fn to_operator(&self) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |i, j| self.coords[i * d + j])
    }
}

/// Row-major vectorization of a density matrix.
pub fn vectorize(rho: &DensityMatrix) -> LiouvilleVector {
    LiouvilleVector::from_operator(rho.matrix())
}

/// `⟨⟨a|b⟩⟩ = tr(a† b)`.
pub fn hs_inner(a: &LiouvilleVector, b: &LiouvilleVector) -> Result<C64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(a.coords
        .iter()
        .zip(b.coords.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}
