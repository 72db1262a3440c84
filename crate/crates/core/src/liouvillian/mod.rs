//! Superoperators of the master equation `ρ̇ = L0(ρ) + L1(ρ)`.
//!
//! All superoperators act on row-major vectorised density matrices, so
//! `A X B` corresponds to `A ⊗ Bᵀ` and `A X A†` to `A ⊗ conj(A)`.

mod basis;

pub use basis::{eigenbasis_rhs, BasisPath, EigenbasisGenerator, NoiseEigenbasis};

use crate::error::{Error, Result};
use crate::noise::{NoiseModel, TwoLevelCoefficients, SERIES_MAX_TERMS, SERIES_REL_TOL};
use crate::qcore::{eigendecompose, CMatrix, HermitianOperator, LiouvilleVector, C64};

/// Which generator a [`Superoperator`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuperoperatorKind {
    L0,
    L1,
    Total,
    Gaussian,
    TwoLevel,
}

/// Dense `dim² × dim²` linear map on vectorised operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
    kind: SuperoperatorKind,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix, kind: SuperoperatorKind) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> SuperoperatorKind {
        self.kind
    }

    pub fn apply(&self, v: &LiouvilleVector) -> Result<LiouvilleVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        LiouvilleVector::from_coords(self.dim, &self.matrix * v.coords())
    }

    /// Action on an operator given as a matrix.
    pub fn apply_operator(&self, m: &CMatrix) -> Result<CMatrix> {
        Ok(self
            .apply(&LiouvilleVector::from_operator(m))?
            .to_operator())
    }

    /// Sum of two generators; the result is tagged [`SuperoperatorKind::Total`].
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
            kind: SuperoperatorKind::Total,
        })
    }

    /// Largest entry of `⟨⟨I| L`, which vanishes for trace-preserving maps.
    pub fn trace_leak(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|i| self.matrix[(i * d + i, col)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `L + L†`.
    pub fn anti_hermiticity_deviation(&self) -> f64 {
        (&self.matrix + self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `L - L†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// The noise part of a master equation.
#[derive(Clone, Debug)]
pub enum NoiseTerm {
    /// Poisson strikes; `L1` has eigenvalues `ν[C(-gap) - 1]`.
    Poisson(NoiseModel),
    /// `-iJ[H₁, ρ] - D[H₁, [H₁, ρ]]`: the two-level reduction, or the
    /// Gaussian white-noise limit with `(J̃, D̃)`.
    Diffusive(TwoLevelCoefficients),
}

impl NoiseTerm {
    /// Eigenvalue on `|φ_n⟩⟨φ_m|` for `gap = E_n - E_m` of `H₁`.
    pub fn beta(&self, gap: f64) -> Result<C64> {
        match self {
            Self::Poisson(model) => model.beta_eigenvalue(gap),
            Self::Diffusive(c) => Ok(c.beta(gap)),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Poisson(model) => model.is_symmetric(),
            Self::Diffusive(c) => c.j == 0.0,
        }
    }

    pub fn is_silent(&self) -> bool {
        match self {
            Self::Poisson(model) => model.nu() == 0.0,
            Self::Diffusive(c) => c.j == 0.0 && c.d == 0.0,
        }
    }
}

fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Superoperator of `X ↦ A X`.
pub fn left_multiplication(a: &CMatrix) -> CMatrix {
    a.kronecker(&identity(a.nrows()))
}

/// Superoperator of `X ↦ X B`.
pub fn right_multiplication(b: &CMatrix) -> CMatrix {
    identity(b.nrows()).kronecker(&b.transpose())
}

/// Superoperator of `X ↦ [H, X]`.
pub fn commutator_superoperator(h: &CMatrix) -> CMatrix {
    left_multiplication(h) - right_multiplication(h)
}

/// Superoperator of `X ↦ A X A†`.
pub fn conjugation_superoperator(a: &CMatrix) -> CMatrix {
    a.kronecker(&a.map(|z| z.conj()))
}

/// `L0(ρ) = -i[H₀, ρ]`.
pub fn build_l0(h0: &HermitianOperator) -> Superoperator {
    let m = commutator_superoperator(h0.matrix()) * C64::new(0.0, -1.0);
    Superoperator {
        dim: h0.dim(),
        matrix: m,
        kind: SuperoperatorKind::L0,
    }
}

/// Spectral form `L1 = Σ β_{n,m} |B_{n,m}⟩⟩⟨⟨B_{n,m}|` over the eigenbasis of `H₁`.
pub fn build_l1_spectral(
    h1: &HermitianOperator,
    model: &NoiseModel,
) -> Result<(Superoperator, NoiseEigenbasis)> {
    let basis = NoiseEigenbasis::new(eigendecompose(h1), &NoiseTerm::Poisson(model.clone()))?;
    let sup = basis.superoperator();
    Ok((sup, basis))
}

/// `L1` from the moment series `ν Σ_s (-i)^s ⟨ξ^s⟩/s! [H₁, ρ]_s`.
pub fn build_l1_series(
    h1: &HermitianOperator,
    model: &NoiseModel,
    max_terms: u32,
) -> Result<Superoperator> {
    let d = h1.dim();
    let ad = commutator_superoperator(h1.matrix());
    let mut power = CMatrix::identity(d * d, d * d);
    let mut sum = CMatrix::zeros(d * d, d * d);
    let mut coefficient = C64::new(1.0, 0.0);
    let mut small_run = 0;
    let max_terms = max_terms.min(SERIES_MAX_TERMS);
    for s in 1..=max_terms {
        power = &ad * power;
        coefficient *= C64::new(0.0, -1.0) / s as f64;
        let term = &power * (coefficient * model.distribution().moment(s)?);
        let term_norm = term.norm();
        sum += term;
        if !sum.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        if term_norm <= SERIES_REL_TOL * sum.norm() {
            small_run += 1;
            if small_run >= 2 {
                return Superoperator::new(
                    d,
                    sum * C64::new(model.nu(), 0.0),
                    SuperoperatorKind::L1,
                );
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::SeriesDivergence(format!(
        "L1 moment series after {max_terms} terms"
    )))
}

/// `L1(ρ) = ν ∫ dξ P(ξ) (A_ξ ρ A_ξ† - ρ)` with `A_ξ` from a matrix exponential.
pub fn build_l1_quadrature(h1: &HermitianOperator, model: &NoiseModel) -> Result<Superoperator> {
    let d = h1.dim();
    let n = d * d;
    let h = h1.matrix().clone();
    let kick = |xi: f64| conjugation_superoperator(&(&h * C64::new(0.0, -xi)).exp());
    let flat = model.distribution().expectation(2 * n * n, |xi, out| {
        let k = kick(xi);
        for (idx, z) in k.iter().enumerate() {
            out[2 * idx] = z.re;
            out[2 * idx + 1] = z.im;
        }
    })?;
    let mean = CMatrix::from_iterator(n, n, flat.chunks(2).map(|c| C64::new(c[0], c[1])));
    let m = (mean - CMatrix::identity(n, n)) * C64::new(model.nu(), 0.0);
    Superoperator::new(d, m, SuperoperatorKind::L1)
}

fn diffusive(
    h0: &HermitianOperator,
    h1: &HermitianOperator,
    j: f64,
    d: f64,
    kind: SuperoperatorKind,
) -> Result<Superoperator> {
    if h0.dim() != h1.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: h1.dim(),
        });
    }
    let coherent = h0.matrix() + h1.matrix() * C64::new(j, 0.0);
    let ad1 = commutator_superoperator(h1.matrix());
    let m =
        commutator_superoperator(&coherent) * C64::new(0.0, -1.0) - &ad1 * &ad1 * C64::new(d, 0.0);
    Superoperator::new(h0.dim(), m, kind)
}

/// Gaussian white-noise generator `-i[H₀ + J̃H₁, ρ] - D̃[H₁, [H₁, ρ]]`.
pub fn build_gaussian_generator(
    h0: &HermitianOperator,
    h1: &HermitianOperator,
    j_tilde: f64,
    d_tilde: f64,
) -> Result<Superoperator> {
    if !(d_tilde >= 0.0) || !j_tilde.is_finite() || !d_tilde.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite J̃ and D̃ ≥ 0, got ({j_tilde}, {d_tilde})"
        )));
    }
    diffusive(h0, h1, j_tilde, d_tilde, SuperoperatorKind::Gaussian)
}

/// Two-level generator `-i[H₀ + JH₁, ρ] - D[H₁, [H₁, ρ]]`.
pub fn build_two_level_generator(
    h0: &HermitianOperator,
    h1: &HermitianOperator,
    coeffs: &TwoLevelCoefficients,
) -> Result<Superoperator> {
    if h0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h0.dim(),
        });
    }
    diffusive(h0, h1, coeffs.j, coeffs.d, SuperoperatorKind::TwoLevel)
}

/// `L1` for any noise term, using the spectral form for Poisson strikes.
pub fn build_l1(h1: &HermitianOperator, noise: &NoiseTerm) -> Result<Superoperator> {
    match noise {
        NoiseTerm::Poisson(model) => Ok(build_l1_spectral(h1, model)?.0),
        NoiseTerm::Diffusive(c) => diffusive(
            &HermitianOperator::zeros(h1.dim()),
            h1,
            c.j,
            c.d,
            SuperoperatorKind::L1,
        ),
    }
}

/// `χ = (gap/2)²` for a two-level `H₁` with `gap = E₊ - E₋`.
pub fn two_level_chi(h1: &HermitianOperator) -> Result<f64> {
    if h1.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h1.dim(),
        });
    }
    let e = eigendecompose(h1).values;
    Ok(0.25 * (e[1] - e[0]).powi(2))
}

#[cfg(test)]
mod tests;
