use std::fmt;
use std::sync::Arc;

use super::{eigendecompose, CMatrix, C64};
use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
const HERMITIAN_TOL: f64 = 1e-12;

/// Largest elementwise deviation `|m_ij - conj(m_ji)|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// A Hermitian matrix of dimension at least two (energy units, ħ = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() < 2 {
            return Err(Error::InvalidParameter(format!(
                "Hilbert dimension must be at least 2, got {}",
                matrix.nrows()
            )));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let deviation = hermiticity_deviation(&matrix);
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(
            hermiticity_deviation(&matrix)
                <= 1e-9 * matrix.iter().map(|z| z.norm()).fold(1.0, f64::max)
        );
        Self { matrix }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            matrix: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
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

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }
}

type OperatorFn = dyn Fn(f64) -> CMatrix + Send + Sync;

/// A deterministic map `t -> H(t)` onto Hermitian matrices of a fixed
/// dimension.
#[derive(Clone)]
pub struct TimeDependentOperator {
    dim: usize,
    eval: Arc<OperatorFn>,
}

impl fmt::Debug for TimeDependentOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentOperator")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl TimeDependentOperator {
    /// The closure must return a Hermitian `dim × dim` matrix for every `t`.
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(f),
        }
    }

    pub fn constant(op: HermitianOperator) -> Self {
        let dim = op.dim();
        let m = op.into_matrix();
        Self::new(dim, move |_| m.clone())
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, move |_| CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Raw matrix at time `t`, without validation.
    pub fn matrix_at(&self, t: f64) -> CMatrix {
        (self.eval)(t)
    }

    pub fn evaluate(&self, t: f64) -> HermitianOperator {
        HermitianOperator::new_unchecked(self.matrix_at(t))
    }

    /// Like [`evaluate`](Self::evaluate) but validates shape and Hermiticity.
    pub fn try_evaluate(&self, t: f64) -> Result<HermitianOperator> {
        let m = self.matrix_at(t);
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        HermitianOperator::new(m)
    }

    /// `t -> factor * H(t)`.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.eval.clone();
        Self::new(self.dim, move |t| inner(t) * C64::new(factor, 0.0))
    }

    /// `t -> self(t) + other(t)`.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let a = self.eval.clone();
        let b = other.eval.clone();
        Self::new(self.dim, move |t| a(t) + b(t))
    }
}

/// The strike unitary `exp(-i ξ H₁)`.
pub fn unitary_kick(h1: &HermitianOperator, xi: f64) -> CMatrix {
    let eig = eigendecompose(h1);
    let n = h1.dim();
    let phases = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, -xi * eig.values[i])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &eig.vectors * phases * eig.vectors.adjoint()
}

/// Iterated commutator `[H₁, ρ]_s`, with `[H₁, ρ]_0 = ρ`.
pub fn nested_commutator(h1: &HermitianOperator, rho: &CMatrix, s: u32) -> CMatrix {
    let h = h1.matrix();
    let mut acc = rho.clone();
    for _ in 0..s {
        acc = commutator(h, &acc);
    }
    acc
}
