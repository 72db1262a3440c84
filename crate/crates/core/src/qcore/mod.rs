//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Units follow ħ = 1 and Ω₀ = 1, so energies and frequencies share the
//! same scale and times are measured in 1/Ω₀.

mod eigen;
mod operator;
mod state;

pub use eigen::{eigendecompose, track_eigenframe, EigenFrame, EigenSystem, DEGENERACY_GAP};
pub use operator::{
    commutator, hermiticity_deviation, nested_commutator, unitary_kick, HermitianOperator,
    TimeDependentOperator,
};
pub(crate) use state::min_eigenvalue;
pub use state::{hs_inner, vectorize, DensityMatrix, LiouvilleVector};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (column-major storage, as in nalgebra).
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Maximum elementwise deviation of `m` from the identity.
pub fn identity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    (m - CMatrix::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
