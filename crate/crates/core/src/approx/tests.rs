use super::*;
use crate::noise::{NoiseModel, StrikeDistribution, TwoLevelCoefficients};
use crate::propagate::integrate_unitary;
use crate::qcore::{eigendecompose, HermitianOperator};
use crate::schemes::{rap_noise_h1, rap_scheme, H1Variant};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn diffusive(d: f64) -> NoiseTerm {
    NoiseTerm::Diffusive(TwoLevelCoefficients::new(0.0, d).unwrap())
}

#[test]
fn fidelity_reference_values() {
    let psi = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    let rho = DensityMatrix::from_pure(&psi).unwrap();
    assert!((fidelity(&rho, &psi).unwrap() - 1.0).abs() < 1e-15);
    let mixed = DensityMatrix::maximally_mixed(2);
    assert!((fidelity(&mixed, &psi).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    let orth = CVector::from_vec(vec![c(0.8, 0.0), c(0.0, -0.6)]);
    assert!(fidelity(&rho, &orth).unwrap() < 1e-7);
    assert!(fidelity(&rho, &CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
}

#[test]
fn static_adiabatic_state_is_phased_eigenstate() {
    let h = HermitianOperator::new(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.3, 0.0), c(0.2, -0.1), c(0.2, 0.1), c(-0.4, 0.0)],
    ))
    .unwrap();
    let eig = eigendecompose(&h);
    let op = TimeDependentOperator::constant(h);
    let ad = adiabatic_state(&op, &[c(0.0, 0.0), c(1.0, 0.0)], 3.0).unwrap();
    let expected = eig.vector(1) * C64::from_polar(1.0, -eig.values[1] * 3.0);
    assert!((ad.psi - expected).norm() < 1e-10);
}

#[test]
fn superposition_adiabatic_state_is_pure_projector() {
    let protocol = rap_scheme(1.0, 20.0).unwrap();
    let a = [c(0.6, 0.0), c(0.0, 0.8)];
    let ad = adiabatic_state(protocol.h0(), &a, 20.0).unwrap();
    let outer = &ad.psi * ad.psi.adjoint();
    assert!((ad.rho.matrix() - outer).norm() < 1e-14);
    assert!((ad.psi.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn rap_adiabatic_state_improves_with_time() {
    let mut errors = Vec::new();
    for horizon in [10.0, 40.0, 160.0] {
        let protocol = rap_scheme(1.0, horizon).unwrap();
        let psi0 = protocol.initial_state().unwrap();
        let exact = integrate_unitary(
            protocol.h0(),
            &psi0,
            0.0,
            horizon,
            &IntegrationConfig::default(),
        )
        .unwrap();
        let ad = adiabatic_state(protocol.h0(), &[c(0.0, 0.0), c(1.0, 0.0)], horizon).unwrap();
        errors.push(1.0 - ad.psi.dotc(&exact.state).norm());
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[2] < 1e-3);
}

#[test]
fn sensitivity_vanishes_without_noise() {
    let protocol = rap_scheme(1.0, 20.0).unwrap();
    let h1 = rap_noise_h1(1.0, 20.0, H1Variant::SameAsH0).unwrap();
    let noise = diffusive(0.0);
    let s = noise_sensitivity(
        protocol.h0(),
        &h1,
        &noise,
        &protocol.initial_density().unwrap(),
        &protocol.target_state().unwrap(),
        20.0,
        &IntegrationConfig::default(),
    )
    .unwrap();
    assert_eq!(s.slope, 0.0);
    assert!(s.f0 > 0.9);
}

#[test]
fn sensitivity_rejects_orthogonal_target() {
    let h0 = TimeDependentOperator::constant(HermitianOperator::from_real_diagonal(&[-0.5, 0.5]));
    let target = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
    let r = noise_sensitivity(
        &h0,
        &h0,
        &diffusive(1.0),
        &DensityMatrix::basis(2, 0),
        &target,
        1.0,
        &IntegrationConfig::default(),
    );
    assert!(matches!(r, Err(Error::SingularExpansion { .. })));
}

#[test]
fn sensitivity_matches_finite_difference() {
    let horizon = 20.0;
    let protocol = rap_scheme(1.0, horizon).unwrap();
    let h1 = rap_noise_h1(1.0, horizon, H1Variant::SameAsH0).unwrap();
    let rho0 = protocol.initial_density().unwrap();
    let target = protocol.target_state().unwrap();
    let cfg = IntegrationConfig {
        rel_tol: 1e-11,
        abs_tol: 1e-14,
        ..IntegrationConfig::default()
    };
    let s = noise_sensitivity(
        protocol.h0(),
        &h1,
        &diffusive(1.0),
        &rho0,
        &target,
        horizon,
        &cfg,
    )
    .unwrap();
    let kappa = 1e-3;
    let f = |k: f64| {
        let eq = MasterEquation::new(protocol.h0().clone(), h1.clone(), diffusive(1.0))
            .unwrap()
            .with_noise_scale(k);
        let record = propagate(&eq, &rho0, horizon, &cfg).unwrap();
        fidelity(record.final_state(), &target).unwrap()
    };
    let fd = (f(kappa) - f(-kappa)) / (2.0 * kappa);
    assert!(s.slope < 0.0);
    assert!(
        ((s.slope - fd) / fd).abs() < 5e-3,
        "analytic {} fd {fd}",
        s.slope
    );
}

#[test]
fn strong_limits_for_rap_variants() {
    let horizon = 20.0;
    let protocol = rap_scheme(1.0, horizon).unwrap();
    let rho0 = protocol.initial_density().unwrap();
    let target = protocol.target_state().unwrap();
    let cases = [
        (H1Variant::SameAsH0, 1.0, false),
        (H1Variant::FrequencyError, 0.0, false),
        (H1Variant::TimingFrequency { c: 1.0 }, 0.5f64.sqrt(), true),
    ];
    for (variant, expected, degenerate) in cases {
        let h1 = rap_noise_h1(1.0, horizon, variant).unwrap();
        let path = BasisPath::new(h1, horizon, 2001).unwrap();
        let lim = strong_noise_limit(&path, &diffusive(1.0), &rho0, &target).unwrap();
        assert!(
            (lim.fidelity - expected).abs() < 1e-6,
            "{variant:?}: {}",
            lim.fidelity
        );
        assert_eq!(lim.degenerate_start, degenerate);
        assert!((lim.rho_final.purity() - lim.purity).abs() < 1e-10);
    }
}

#[test]
fn strong_limit_rejects_asymmetric_noise() {
    let h1 = rap_noise_h1(1.0, 20.0, H1Variant::SameAsH0).unwrap();
    let path = BasisPath::new(h1, 20.0, 101).unwrap();
    let noise = NoiseTerm::Poisson(
        NoiseModel::new(1.0, StrikeDistribution::point_mass(0.3).unwrap()).unwrap(),
    );
    let target = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
    assert!(strong_noise_limit(&path, &noise, &DensityMatrix::basis(2, 0), &target).is_err());
}

#[test]
fn naive_solution_static_cases() {
    let h1 = TimeDependentOperator::constant(HermitianOperator::from_real_diagonal(&[-0.5, 0.5]));
    let h0 = TimeDependentOperator::constant(HermitianOperator::from_real_diagonal(&[0.3, -0.3]));
    let noise = diffusive(0.7);
    let cfg = IntegrationConfig::default();
    let diag =
        naive_strong_noise(&h0, &h1, &noise, &DensityMatrix::basis(2, 1), 2.0, &cfg).unwrap();
    assert!((diag.final_state().matrix() - DensityMatrix::basis(2, 1).matrix()).norm() < 1e-12);
    let plus = CVector::from_vec(vec![c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)]);
    let rec = naive_strong_noise(
        &h0,
        &h1,
        &noise,
        &DensityMatrix::from_pure(&plus).unwrap(),
        2.0,
        &cfg,
    )
    .unwrap();
    let expected = 0.5 * (-0.7 * 2.0f64).exp();
    assert!((rec.final_state().matrix()[(0, 1)] - c(expected, 0.0)).norm() < 1e-9);
}

#[test]
fn second_order_without_coherent_part_is_zeroth_order() {
    let h1 = TimeDependentOperator::constant(HermitianOperator::from_real_diagonal(&[-0.5, 0.5]));
    let h0 = TimeDependentOperator::zero(2);
    let plus = CVector::from_vec(vec![c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)]);
    let rho0 = DensityMatrix::from_pure(&plus).unwrap();
    let path = BasisPath::new(h1, 2.0, 11).unwrap();
    let acc = strong_noise_accumulators(&path, &diffusive(0.4), &h0, &rho0, 2.0, 50).unwrap();
    let [d0, d1, d2] = acc.orders();
    assert!(d1.norm() == 0.0 && d2.norm() == 0.0);
    assert!((d0[(0, 1)] - c(0.5 * (-0.8f64).exp(), 0.0)).norm() < 1e-12);
}

#[test]
fn accumulator_invariants() {
    let horizon = 20.0;
    let protocol = rap_scheme(1.0, horizon).unwrap();
    let h1 = rap_noise_h1(1.0, horizon, H1Variant::FrequencyError).unwrap();
    let path = BasisPath::new(h1, horizon, 201).unwrap();
    let acc = strong_noise_accumulators(
        &path,
        &diffusive(3.0),
        protocol.h0(),
        &protocol.initial_density().unwrap(),
        horizon,
        400,
    )
    .unwrap();
    for (l, m) in acc.lambda.iter().zip(&acc.coupling) {
        for n in 0..2 {
            assert_eq!(l[(n, n)], c(0.0, 0.0));
            for k in 0..2 {
                assert!(l[(n, k)].re <= 1e-12);
            }
            for a in 0..2 {
                for b in 0..2 {
                    let v = m[(n * 2 + n, a * 2 + b)];
                    if (a == n) == (b == n) {
                        assert_eq!(v, c(0.0, 0.0));
                    }
                }
            }
        }
    }
}

#[test]
fn fitted_weights_match_series_switch() {
    for z in [c(0.0999, 0.0), c(-0.05, 0.08), c(0.0, 0.0999)] {
        let (phi, psi) = fitted_weights(z);
        let e = z.exp();
        assert!((phi - (e - 1.0) / z).norm() < 1e-12);
        assert!((psi - (e * (z - 1.0) + 1.0) / (z * z)).norm() < 1e-9);
    }
    assert_eq!(fitted_weights(c(0.0, 0.0)), (c(1.0, 0.0), c(0.5, 0.0)));
}
