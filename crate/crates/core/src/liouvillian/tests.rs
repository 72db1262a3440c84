use super::*;
use crate::noise::{two_level_jd, StrikeDistribution};
use crate::qcore::{commutator, unitary_kick, CVector};
use crate::testing::{max_abs, random_density, random_hermitian, rng};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn gaussian_model(nu: f64, sigma: f64) -> NoiseModel {
    NoiseModel::new(nu, StrikeDistribution::gaussian(0.0, sigma).unwrap()).unwrap()
}

fn rel_diff(a: &Superoperator, b: &Superoperator) -> f64 {
    (a.matrix() - b.matrix()).norm() / a.matrix().norm().max(1e-300)
}

#[test]
fn l0_of_zero_is_zero() {
    let l0 = build_l0(&HermitianOperator::zeros(3));
    assert_eq!(max_abs(l0.matrix()), 0.0);
}

#[test]
fn l0_eigenvalues_on_basis_projectors() {
    let h0 = HermitianOperator::from_real_diagonal(&[-0.5, 0.5]);
    let l0 = build_l0(&h0);
    for (n, m, alpha) in [
        (0, 0, c(0.0, 0.0)),
        (1, 1, c(0.0, 0.0)),
        (0, 1, c(0.0, 1.0)),
        (1, 0, c(0.0, -1.0)),
    ] {
        let mut b = CMatrix::zeros(2, 2);
        b[(n, m)] = c(1.0, 0.0);
        let out = l0.apply_operator(&b).unwrap();
        assert!(max_abs(&(out - b * alpha)) < 1e-15);
    }
}

#[test]
fn l0_matches_commutator_and_is_anti_hermitian() {
    let mut r = rng(1);
    let h0 = random_hermitian(&mut r, 3);
    let rho = random_density(&mut r, 3);
    let l0 = build_l0(&h0);
    let expected = commutator(h0.matrix(), rho.matrix()) * c(0.0, -1.0);
    assert!(max_abs(&(l0.apply_operator(rho.matrix()).unwrap() - expected)) < 1e-14);
    assert!(l0.anti_hermiticity_deviation() < 1e-14);
    assert!(l0.trace_leak() < 1e-14);
}

#[test]
fn spectral_zero_rate_and_degenerate_give_zero() {
    let mut r = rng(2);
    let h1 = random_hermitian(&mut r, 3);
    let (l1, _) = build_l1_spectral(&h1, &gaussian_model(0.0, 1.0)).unwrap();
    assert_eq!(max_abs(l1.matrix()), 0.0);
    let flat = HermitianOperator::from_real_diagonal(&[0.7, 0.7, 0.7]);
    let (l1, _) = build_l1_spectral(&flat, &gaussian_model(2.0, 1.0)).unwrap();
    assert_eq!(max_abs(l1.matrix()), 0.0);
}

#[test]
fn spectral_projectors_are_eigenvectors() {
    let mut r = rng(3);
    let h1 = random_hermitian(&mut r, 3);
    let model = NoiseModel::new(1.7, StrikeDistribution::gaussian(0.3, 0.6).unwrap()).unwrap();
    let (l1, basis) = build_l1_spectral(&h1, &model).unwrap();
    for n in 0..3 {
        assert_eq!(basis.betas()[(n, n)], c(0.0, 0.0));
        for m in 0..3 {
            assert!((basis.betas()[(n, m)] - basis.betas()[(m, n)].conj()).norm() < 1e-14);
            let b = basis.projector(n, m);
            let out = l1.apply(&b).unwrap();
            let diff = out.coords() - b.coords() * basis.betas()[(n, m)];
            assert!(diff.norm() < 1e-9);
        }
    }
    assert!(l1.trace_leak() < 1e-12);
}

#[test]
fn spectral_matches_quadrature_gaussian() {
    let mut r = rng(4);
    let h1 = random_hermitian(&mut r, 3);
    let model = gaussian_model(1.3, 0.8);
    let (spectral, _) = build_l1_spectral(&h1, &model).unwrap();
    let quad = build_l1_quadrature(&h1, &model).unwrap();
    assert!(
        rel_diff(&spectral, &quad) < 1e-8,
        "{}",
        rel_diff(&spectral, &quad)
    );
}

#[test]
fn point_mass_series_converges_to_kick_form() {
    let mut r = rng(5);
    let h1 = random_hermitian(&mut r, 2);
    let xi = 0.4;
    let nu = 2.0;
    let model = NoiseModel::new(nu, StrikeDistribution::point_mass(xi).unwrap()).unwrap();
    let a = unitary_kick(&h1, xi);
    let oracle = (conjugation_superoperator(&a) - CMatrix::identity(4, 4)) * c(nu, 0.0);
    let series = build_l1_series(&h1, &model, 60).unwrap();
    assert!(max_abs(&(series.matrix() - &oracle)) < 1e-12);
    let quad = build_l1_quadrature(&h1, &model).unwrap();
    assert!(max_abs(&(quad.matrix() - &oracle)) < 1e-12);
}

#[test]
fn laplace_series_matches_spectral() {
    let h1 = HermitianOperator::from_real_diagonal(&[-0.5, 0.0, 0.5]);
    let model = NoiseModel::new(1.0, StrikeDistribution::laplace(0.5).unwrap()).unwrap();
    let (spectral, _) = build_l1_spectral(&h1, &model).unwrap();
    let series = build_l1_series(&h1, &model, 60).unwrap();
    assert!(rel_diff(&spectral, &series) < 1e-8);
}

#[test]
fn series_fails_outside_radius() {
    let h1 = HermitianOperator::from_real_diagonal(&[-1.0, 1.0]);
    let model = NoiseModel::new(1.0, StrikeDistribution::laplace(1.0).unwrap()).unwrap();
    assert!(matches!(
        build_l1_series(&h1, &model, 60),
        Err(Error::SeriesDivergence(_))
    ));
}

#[test]
fn symmetric_l1_is_hermitian_and_negative() {
    let mut r = rng(6);
    let h1 = random_hermitian(&mut r, 3);
    let (l1, _) = build_l1_spectral(&h1, &gaussian_model(3.0, 0.9)).unwrap();
    assert!(l1.hermiticity_deviation() < 1e-12);
    let eig = nalgebra::SymmetricEigen::new(l1.matrix().clone());
    assert!(eig
        .eigenvalues
        .iter()
        .all(|&e| (-6.0 - 1e-9..=1e-10).contains(&e)));
}

#[test]
fn two_level_generator_equals_full_build() {
    let mut r = rng(7);
    for _ in 0..5 {
        let h0 = random_hermitian(&mut r, 2);
        let h1 = random_hermitian(&mut r, 2);
        let model = NoiseModel::new(2.2, StrikeDistribution::gaussian(0.4, 0.7).unwrap()).unwrap();
        let chi = two_level_chi(&h1).unwrap();
        let coeffs = two_level_jd(&model, chi).unwrap();
        let two = build_two_level_generator(&h0, &h1, &coeffs).unwrap();
        let full = build_l0(&h0)
            .plus(&build_l1_spectral(&h1, &model).unwrap().0)
            .unwrap();
        assert!(max_abs(&(two.matrix() - full.matrix())) < 1e-9);
    }
}

#[test]
fn two_level_generator_rejects_three_levels() {
    let h = HermitianOperator::zeros(3);
    let coeffs = TwoLevelCoefficients::new(0.0, 1.0).unwrap();
    assert!(build_two_level_generator(&h, &h, &coeffs).is_err());
}

#[test]
fn gaussian_generator_reduces_to_l0() {
    let mut r = rng(8);
    let h0 = random_hermitian(&mut r, 3);
    let h1 = random_hermitian(&mut r, 3);
    let g = build_gaussian_generator(&h0, &h1, 0.0, 0.0).unwrap();
    assert!(max_abs(&(g.matrix() - build_l0(&h0).matrix())) < 1e-15);
    assert!(build_gaussian_generator(&h0, &h1, 0.0, -1.0).is_err());
}

#[test]
fn gaussian_generator_commuting_decay() {
    let h0 = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 3.0]);
    let h1 = HermitianOperator::from_real_diagonal(&[-1.0, 0.5, 2.0]);
    let dt = 0.3;
    let g = build_gaussian_generator(&h0, &h1, 0.0, dt).unwrap();
    for n in 0..3 {
        for m in 0..3 {
            let mut b = CMatrix::zeros(3, 3);
            b[(n, m)] = c(1.0, 0.0);
            let out = g.apply_operator(&b).unwrap();
            let gap1 = h1.matrix()[(n, n)].re - h1.matrix()[(m, m)].re;
            let gap0 = h0.matrix()[(n, n)].re - h0.matrix()[(m, m)].re;
            let rate = c(-dt * gap1 * gap1, -gap0);
            assert!((out[(n, m)] - rate).norm() < 1e-14);
        }
    }
}

#[test]
fn commuting_hamiltonians_give_commuting_generators() {
    let mut r = rng(9);
    let h = random_hermitian(&mut r, 3);
    let h0 = h.clone();
    let h1 = HermitianOperator::new(h.matrix() * h.matrix() * c(0.5, 0.0) - h.matrix()).unwrap();
    let l0 = build_l0(&h0);
    let (l1, _) = build_l1_spectral(&h1, &gaussian_model(1.0, 1.1)).unwrap();
    let comm = l0.matrix() * l1.matrix() - l1.matrix() * l0.matrix();
    assert!(max_abs(&comm) < 1e-9);
}

#[test]
fn static_eigenbasis_rhs_matches_superoperator() {
    let mut r = rng(10);
    let h0 = random_hermitian(&mut r, 3);
    let h1 = random_hermitian(&mut r, 3);
    let rho = random_density(&mut r, 3);
    let model = gaussian_model(1.5, 0.5);
    let (l1, basis) = build_l1_spectral(&h1, &model).unwrap();
    let total = build_l0(&h0).plus(&l1).unwrap();
    let generator = eigenbasis_rhs(&basis, &h0, &CMatrix::zeros(3, 3));
    let d = basis.coefficients(rho.matrix());
    let ddot = generator.apply(&d);
    let expected = total.apply_operator(rho.matrix()).unwrap();
    assert!(max_abs(&(basis.reconstruct(&ddot) - expected)) < 1e-12);
    assert!(max_abs(&(&ddot - ddot.adjoint())) < 1e-13);
    // M reproduces the non-β part of the generator
    let coupling = generator.coupling();
    let flat = CVector::from_iterator(9, d.transpose().iter().cloned());
    let mflat = coupling * flat;
    let beta_part = d.component_mul(basis.betas());
    for n in 0..3 {
        for m in 0..3 {
            assert!((mflat[n * 3 + m] + beta_part[(n, m)] - ddot[(n, m)]).norm() < 1e-12);
        }
    }
    assert!(
        max_abs(&(basis.apply_operator(rho.matrix()) - l1.apply_operator(rho.matrix()).unwrap()))
            < 1e-12
    );
}

#[test]
fn decoupled_eigenbasis_rhs() {
    let h1 = HermitianOperator::from_real_diagonal(&[-0.5, 0.5]);
    let model = gaussian_model(1.0, 1.0);
    let (_, basis) = build_l1_spectral(&h1, &model).unwrap();
    let generator = eigenbasis_rhs(&basis, &HermitianOperator::zeros(2), &CMatrix::zeros(2, 2));
    let d = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.5, 0.0)]);
    let ddot = generator.apply(&d);
    assert!(max_abs(&(ddot - d.component_mul(basis.betas()))) < 1e-15);
    assert_eq!(generator.rates(), *basis.betas());
}
