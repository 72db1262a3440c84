use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::qcore::{CMatrix, DensityMatrix, HermitianOperator, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> HermitianOperator {
    let a = random_matrix(rng, d);
    HermitianOperator::new((&a + a.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let a = random_matrix(rng, d);
    let m = &a * a.adjoint();
    let tr = m.trace();
    let mut m = m / tr;
    m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(m).unwrap()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
