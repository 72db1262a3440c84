use super::*;
use crate::liouvillian::build_l0;
use crate::noise::StrikeDistribution;
use crate::qcore::{identity_deviation, DensityMatrix};
use crate::testing::{max_abs, random_density, random_hermitian, rng};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn spectral_exp(h: &HermitianOperator, t: f64) -> CMatrix {
    let eig = eigendecompose(h);
    let d = eig.dim();
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::from_polar(1.0, -eig.values[i] * t)
        } else {
            c(0.0, 0.0)
        }
    });
    &eig.vectors * phases * eig.vectors.adjoint()
}

fn rotating(dim: usize, seed: u64) -> TimeDependentOperator {
    let mut r = rng(seed);
    let a = random_hermitian(&mut r, dim).into_matrix();
    let b = random_hermitian(&mut r, dim).into_matrix();
    TimeDependentOperator::new(dim, move |t| {
        &a * C64::new(t.cos(), 0.0) + &b * C64::new((0.5 * t).sin(), 0.0)
    })
}

#[test]
fn zero_rate_matches_unitary_evolution() {
    let h0 = rotating(2, 1);
    let h1 = rotating(2, 2);
    let rho0 = random_density(&mut rng(3), 2);
    let model = NoiseModel::new(0.0, StrikeDistribution::gaussian(0.0, 1.0).unwrap()).unwrap();
    let cfg = IntegrationConfig::default();
    let record = integrate_master(&h0, &h1, &model, &rho0, 3.0, &cfg).unwrap();
    let u = propagators(&h0, 0.0, &[3.0], &cfg).unwrap().pop().unwrap();
    let expected = &u * rho0.matrix() * u.adjoint();
    assert!(max_abs(&(record.final_state().matrix() - expected)) < 1e-8);
    assert!(record.is_ok());
}

#[test]
fn static_commuting_closed_form() {
    let h0 = HermitianOperator::from_real_diagonal(&[-0.5, 0.2, 0.9]);
    let h1 = HermitianOperator::from_real_diagonal(&[0.3, -0.4, 1.0]);
    let model = NoiseModel::new(1.2, StrikeDistribution::gaussian(0.2, 0.7).unwrap()).unwrap();
    let rho0 = random_density(&mut rng(4), 3);
    let horizon = 2.5;
    let record = integrate_master(
        &TimeDependentOperator::constant(h0.clone()),
        &TimeDependentOperator::constant(h1.clone()),
        &model,
        &rho0,
        horizon,
        &IntegrationConfig::default(),
    )
    .unwrap();
    let rho = record.final_state().matrix();
    for n in 0..3 {
        for m in 0..3 {
            let e0 = h0.matrix()[(n, n)].re - h0.matrix()[(m, m)].re;
            let e1 = h1.matrix()[(n, n)].re - h1.matrix()[(m, m)].re;
            let rate = c(0.0, -e0) + model.beta_eigenvalue(e1).unwrap();
            let expected = rho0.matrix()[(n, m)] * (rate * horizon).exp();
            assert!((rho[(n, m)] - expected).norm() < 1e-8);
        }
    }
}

#[test]
fn conservation_diagnostics_on_noisy_run() {
    let h0 = rotating(3, 5);
    let h1 = rotating(3, 6);
    let model = NoiseModel::new(2.0, StrikeDistribution::laplace(0.4).unwrap()).unwrap();
    let rho0 = DensityMatrix::basis(3, 0);
    let record =
        integrate_master(&h0, &h1, &model, &rho0, 4.0, &IntegrationConfig::default()).unwrap();
    assert!(record.is_ok(), "{:?}", record.failure);
    assert!(record.max_trace_error() < 1e-8);
    assert!(record.min_eigenvalue() > -1e-7);
    assert_eq!(record.times.len(), 41);
}

#[test]
fn double_bias_is_doubled_hamiltonian() {
    let h0 = rotating(2, 7);
    let coeffs = TwoLevelCoefficients::new(1.0, 0.0).unwrap();
    let rho0 = DensityMatrix::basis(2, 1);
    let cfg = IntegrationConfig::default();
    let record = integrate_two_level(&h0, &h0, &coeffs, &rho0, 3.0, &cfg).unwrap();
    let u = propagators(&h0.scaled(2.0), 0.0, &[3.0], &cfg)
        .unwrap()
        .pop()
        .unwrap();
    let expected = &u * rho0.matrix() * u.adjoint();
    assert!(max_abs(&(record.final_state().matrix() - expected)) < 1e-8);
}

#[test]
fn two_level_matches_poisson_master() {
    let h0 = rotating(2, 8);
    let h1 = TimeDependentOperator::constant(HermitianOperator::from_real_diagonal(&[-0.5, 0.5]));
    let model = NoiseModel::new(1.5, StrikeDistribution::gaussian(0.3, 0.6).unwrap()).unwrap();
    let coeffs = crate::noise::two_level_jd(&model, 0.25).unwrap();
    let rho0 = DensityMatrix::basis(2, 0);
    let cfg = IntegrationConfig::default();
    let a = integrate_master(&h0, &h1, &model, &rho0, 3.0, &cfg).unwrap();
    let b = integrate_two_level(&h0, &h1, &coeffs, &rho0, 3.0, &cfg).unwrap();
    assert!(max_abs(&(a.final_state().matrix() - b.final_state().matrix())) < 1e-7);
}

#[test]
fn static_unitary_matches_eigen_exponential() {
    let h = random_hermitian(&mut rng(9), 3);
    let op = TimeDependentOperator::constant(h.clone());
    let psi = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let ev = integrate_unitary(&op, &psi, 0.5, 2.0, &IntegrationConfig::default()).unwrap();
    assert!(max_abs(&(&ev.propagator - spectral_exp(&h, 1.5))) < 1e-8);
    let same = integrate_unitary(&op, &psi, 1.0, 1.0, &IntegrationConfig::default()).unwrap();
    assert_eq!(same.state, psi);
}

#[test]
fn unitary_group_property() {
    let h0 = rotating(3, 10);
    let cfg = IntegrationConfig::default();
    let forward = propagators(&h0, 0.0, &[1.0, 2.5], &cfg).unwrap();
    let back = propagators(&h0, 2.5, &[1.0, 0.0], &cfg).unwrap();
    let u_c_b = propagators(&h0, 1.0, &[2.5], &cfg).unwrap().pop().unwrap();
    assert!(max_abs(&(&u_c_b * &forward[0] - &forward[1])) < 1e-8);
    assert!(identity_deviation(&(&back[1] * &forward[1])) < 1e-8);
    assert!(identity_deviation(&(forward[1].adjoint() * &forward[1])) < 1e-9);
}

#[test]
fn l0_action_matches_superoperator() {
    let mut r = rng(11);
    let h0 = random_hermitian(&mut r, 3);
    let rho = random_density(&mut r, 3);
    let eq = MasterEquation::new(
        TimeDependentOperator::constant(h0.clone()),
        TimeDependentOperator::zero(3),
        NoiseTerm::Poisson(
            NoiseModel::new(0.0, StrikeDistribution::point_mass(1.0).unwrap()).unwrap(),
        ),
    )
    .unwrap();
    let direct = eq.apply(0.0, rho.matrix()).unwrap();
    assert!(max_abs(&(direct - build_l0(&h0).apply_operator(rho.matrix()).unwrap())) < 1e-14);
}

#[test]
fn coefficient_path_matches_master() {
    let h0 = rotating(3, 12);
    let mut r = rng(13);
    let a = random_hermitian(&mut r, 3).into_matrix();
    let b = HermitianOperator::from_real_diagonal(&[-1.0, 0.0, 1.5]).into_matrix();
    let h1 = TimeDependentOperator::new(3, move |t| &b + &a * C64::new(0.3 * t.sin(), 0.0));
    let model = NoiseModel::new(1.0, StrikeDistribution::gaussian(0.0, 0.8).unwrap()).unwrap();
    let noise = NoiseTerm::Poisson(model.clone());
    let horizon = 2.0;
    let cfg = IntegrationConfig {
        monitor_interval: 0.5,
        ..IntegrationConfig::default()
    };
    let path = BasisPath::new(h1.clone(), horizon, 201).unwrap();
    let rho0 = DensityMatrix::basis(3, 0);
    let d0 =
        path.at(0.0).unwrap().vectors.adjoint() * rho0.matrix() * path.at(0.0).unwrap().vectors;
    let coeffs = integrate_coefficients(&path, &noise, &h0, &d0, horizon, &cfg).unwrap();
    let master = integrate_master(&h0, &h1, &model, &rho0, horizon, &cfg).unwrap();
    for k in 0..coeffs.times.len() {
        let rho = coeffs.reconstruct(&path, k).unwrap();
        assert!(
            max_abs(&(rho - master.states[k].matrix())) < 1e-6,
            "k = {k}"
        );
        let d = &coeffs.coefficients[k];
        assert!(max_abs(&(d - d.adjoint())) < 1e-9);
    }
}

#[test]
fn negative_noise_scale_marks_breach() {
    let h0 = TimeDependentOperator::constant(HermitianOperator::from_real_diagonal(&[0.0, 0.0]));
    let h1 = TimeDependentOperator::constant(HermitianOperator::from_real_diagonal(&[-0.5, 0.5]));
    let coeffs = TwoLevelCoefficients::new(0.0, 1.0).unwrap();
    let eq = MasterEquation::new(h0, h1, NoiseTerm::Diffusive(coeffs))
        .unwrap()
        .with_noise_scale(-1.0);
    let plus = CVector::from_vec(vec![c(1.0 / 2f64.sqrt(), 0.0), c(1.0 / 2f64.sqrt(), 0.0)]);
    let record = propagate(
        &eq,
        &DensityMatrix::from_pure(&plus).unwrap(),
        2.0,
        &IntegrationConfig::default(),
    )
    .unwrap();
    assert_eq!(record.failure.map(|b| b.kind), Some(BreachKind::Positivity));
}
