use nalgebra::DMatrix;
use proptest::prelude::*;
use shotnoise::liouvillian::{
    build_l0, build_l1_quadrature, build_l1_series, build_l1_spectral, build_two_level_generator,
    two_level_chi,
};
use shotnoise::noise::{
    two_level_jd_quadrature, two_level_jd_series, NoiseModel, StrikeDistribution,
    TwoLevelCoefficients,
};
use shotnoise::qcore::{
    commutator, eigendecompose, hs_inner, nested_commutator, track_eigenframe, unitary_kick,
    CMatrix, DensityMatrix, HermitianOperator, LiouvilleVector, TimeDependentOperator, C64,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn hermitian(d: usize, entries: &[f64]) -> HermitianOperator {
    let mut m = CMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        m[(i, i)] = c(entries[k], 0.0);
        k += 1;
        for j in i + 1..d {
            m[(i, j)] = c(entries[k], entries[k + 1]);
            m[(j, i)] = m[(i, j)].conj();
            k += 2;
        }
    }
    HermitianOperator::new(m).unwrap()
}

fn density(d: usize, entries: &[f64]) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |i, j| {
        c(entries[2 * (i * d + j)], entries[2 * (i * d + j) + 1])
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn relative(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Real roots of `λ³ + a λ² + b λ + c` with three real roots, ascending.
fn cubic_roots(a: f64, b: f64, c0: f64) -> [f64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c0;
    let shift = -a / 3.0;
    if p.abs() < 1e-14 {
        let r = (-q).cbrt();
        return [r + shift; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut r = [0.0; 3];
    for (k, v) in r.iter_mut().enumerate() {
        *v = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift;
    }
    r.sort_by(f64::total_cmp);
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hs_inner_is_trace_of_product(d in 2usize..5, xs in entries(32), ys in entries(32)) {
        let a = CMatrix::from_fn(d, d, |i, j| c(xs[i * d + j], xs[16 + i * d + j]));
        let b = CMatrix::from_fn(d, d, |i, j| c(ys[i * d + j], ys[16 + i * d + j]));
        let inner = hs_inner(&LiouvilleVector::from_operator(&a), &LiouvilleVector::from_operator(&b)).unwrap();
        let mut trace = c(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                trace += a[(k, i)].conj() * b[(k, i)];
            }
        }
        prop_assert!((inner - trace).norm() < 1e-12);
        let swapped = hs_inner(&LiouvilleVector::from_operator(&b), &LiouvilleVector::from_operator(&a)).unwrap();
        prop_assert!((swapped - inner.conj()).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_are_characteristic_roots(xs in entries(9)) {
        let h = hermitian(3, &xs);
        let m = h.matrix();
        let tr = m.trace().re;
        let minors = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
            + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
            + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]).re;
        let det = m.determinant().re;
        let roots = cubic_roots(-tr, minors, -det);
        let eig = eigendecompose(&h);
        for k in 0..3 {
            prop_assert!((eig.values[k] - roots[k]).abs() < 1e-7, "{:?} vs {:?}", eig.values, roots);
        }
        prop_assert!((eig.reconstruct() - m).norm() < 1e-10);
    }

    #[test]
    fn nested_commutators_close(xs in entries(4), ys in entries(8)) {
        let h1 = hermitian(2, &xs);
        let rho = density(2, &ys);
        let chi = two_level_chi(&h1).unwrap();
        let first = commutator(h1.matrix(), &rho);
        let second = commutator(h1.matrix(), &first);
        for n in 1..=10u32 {
            let brute = nested_commutator(&h1, &rho, n);
            let closed = if n % 2 == 1 {
                &first * c(2f64.powi(n as i32 - 1) * chi.powf((n as f64 - 1.0) / 2.0), 0.0)
            } else {
                &second * c(2f64.powi(n as i32 - 2) * chi.powf((n as f64 - 2.0) / 2.0), 0.0)
            };
            let scale = brute.norm().max(1e-12);
            prop_assert!((&brute - &closed).norm() <= 1e-9 * scale, "n = {n}");
        }
    }

    #[test]
    fn kicks_preserve_trace_and_spectrum(xs in entries(9), ys in entries(18), xi in -5.0f64..5.0) {
        let h1 = hermitian(3, &xs);
        let rho = density(3, &ys);
        let a = unitary_kick(&h1, xi);
        prop_assert!((&a * a.adjoint() - CMatrix::identity(3, 3)).norm() < 1e-10);
        let kicked = &a * &rho * a.adjoint();
        prop_assert!((kicked.trace() - c(1.0, 0.0)).norm() < 1e-12);
        let before = eigendecompose(&HermitianOperator::new(rho.clone()).unwrap()).values;
        let after = eigendecompose(&HermitianOperator::new((&kicked + kicked.adjoint()) * c(0.5, 0.0)).unwrap()).values;
        for k in 0..3 {
            prop_assert!((before[k] - after[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn characteristic_functions_match_density_quadrature(scale in 0.05f64..2.0, x in -4.0f64..4.0) {
        for dist in [StrikeDistribution::laplace(scale).unwrap(), StrikeDistribution::gaussian(0.3 * scale, scale).unwrap()] {
            let cf = dist.characteristic_function(x).unwrap();
            let v = dist.expectation(2, |xi, out| {
                out[0] = (x * xi).cos();
                out[1] = (x * xi).sin();
            }).unwrap();
            prop_assert!((cf - c(v[0], v[1])).norm() < 1e-8);
            prop_assert!((dist.characteristic_function(-x).unwrap() - cf.conj()).norm() < 1e-14);
            prop_assert!(cf.norm() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn beta_series_matches_closed_form(scale in 0.01f64..0.3, gap in -3.0f64..3.0, nu in 0.1f64..10.0) {
        for dist in [StrikeDistribution::laplace(scale).unwrap(), StrikeDistribution::gaussian(0.5 * scale, scale).unwrap(), StrikeDistribution::point_mass(scale).unwrap()] {
            let model = NoiseModel::new(nu, dist).unwrap();
            let closed = model.beta_eigenvalue(gap).unwrap();
            if let Ok(series) = model.beta_series(gap) {
                prop_assert!((series - closed).norm() <= 1e-8 * closed.norm().max(1e-300) + 1e-14);
            }
        }
    }

    #[test]
    fn two_level_generator_is_l0_plus_l1(xs in entries(4), ys in entries(4), j in -1.0f64..1.0, d in 0.0f64..2.0) {
        let h0 = hermitian(2, &xs);
        let h1 = hermitian(2, &ys);
        let coeffs = TwoLevelCoefficients::new(j, d).unwrap();
        let gen = build_two_level_generator(&h0, &h1, &coeffs).unwrap();
        let eig = eigendecompose(&h1);
        let gap = eig.values[1] - eig.values[0];
        let beta = coeffs.beta(gap);
        prop_assert!((beta - c(-d * gap * gap, -j * gap)).norm() < 1e-9);
        // L1 assembled from the eigenprojectors with β(±gap)
        let mut l1 = CMatrix::zeros(4, 4);
        for n in 0..2 {
            for m in 0..2 {
                if n != m {
                    let b = LiouvilleVector::from_operator(&(eig.vector(n) * eig.vector(m).adjoint()));
                    l1 += b.coords() * b.coords().adjoint() * coeffs.beta(eig.values[n] - eig.values[m]);
                }
            }
        }
        let expected = build_l0(&h0).matrix() + l1;
        prop_assert!((gen.matrix() - &expected).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn l1_builders_agree(d in 2usize..4, xs in entries(9), nu in 0.1f64..5.0, width in 0.05f64..0.6, kind in 0usize..3) {
        let h1 = hermitian(d, &xs);
        let dist = match kind {
            0 => StrikeDistribution::laplace(width).unwrap(),
            1 => StrikeDistribution::gaussian(0.3 * width, width).unwrap(),
            _ => StrikeDistribution::point_mass(width).unwrap(),
        };
        let model = NoiseModel::new(nu, dist).unwrap();
        let (spectral, _) = build_l1_spectral(&h1, &model).unwrap();
        let quadrature = build_l1_quadrature(&h1, &model).unwrap();
        prop_assert!(relative(quadrature.matrix(), spectral.matrix()) < 1e-7);
        if let Ok(series) = build_l1_series(&h1, &model, 60) {
            prop_assert!(relative(series.matrix(), spectral.matrix()) < 1e-7);
        }
    }
}

#[test]
fn jd_series_and_quadrature_agree() {
    let models = [
        NoiseModel::new(1.0, StrikeDistribution::laplace(0.03).unwrap()).unwrap(),
        NoiseModel::new(1.0, StrikeDistribution::gaussian(0.0, 0.05).unwrap()).unwrap(),
    ];
    for model in &models {
        for k in 0..=32 {
            let chi = 1e-6 * 10f64.powf(8.0 * k as f64 / 32.0);
            let quad = two_level_jd_quadrature(model, chi).unwrap();
            let series = two_level_jd_series(model, chi).unwrap();
            assert!(
                (quad.d - series.d).abs() <= 1e-8 * series.d.abs().max(1e-12),
                "chi {chi}: {} vs {}",
                quad.d,
                series.d
            );
            assert!(
                (quad.j - series.j).abs() <= 1e-8 * series.d.abs().max(1e-12),
                "chi {chi}"
            );
        }
    }
}

#[test]
fn gaussian_limit_recovers_diffusion() {
    // ν → ∞ with A = sqrt(D̃/ν): β → -D̃·gap²
    let gap = 1.3;
    let d_tilde = 0.2;
    let mut errors = Vec::new();
    for nu in [1e2, 1e3, 1e4] {
        let model = NoiseModel::laplace_gaussian_limit(nu, d_tilde).unwrap();
        let beta = model.beta_eigenvalue(gap).unwrap();
        errors.push((beta - c(-d_tilde * gap * gap, 0.0)).norm());
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 10.0).abs() < 0.5, "{errors:?}");
    }
}

#[test]
fn transport_residual_shrinks_quadratically() {
    let op = TimeDependentOperator::new(3, |t| {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                c(t.cos(), 0.0),
                c(0.4, 0.2 * t),
                c(0.1, 0.0),
                c(0.4, -0.2 * t),
                c(-0.5, 0.0),
                c(0.3 * t.sin(), 0.1),
                c(0.1, 0.0),
                c(0.3 * t.sin(), -0.1),
                c(1.5, 0.0),
            ],
        )
    });
    let grid = |n: usize| {
        (0..=n)
            .map(|k| 2.0 * k as f64 / n as f64)
            .collect::<Vec<_>>()
    };
    let coarse = track_eigenframe(&op, &grid(100))
        .unwrap()
        .transport_residual();
    let fine = track_eigenframe(&op, &grid(200))
        .unwrap()
        .transport_residual();
    let ratio = coarse / fine;
    assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
}

#[test]
fn densities_from_builders_stay_physical() {
    let h1 = hermitian(3, &[0.3, 0.2, -0.1, 0.5, 0.0, -0.4, 0.1, 0.2, 0.9]);
    let model = NoiseModel::new(2.0, StrikeDistribution::gaussian(0.1, 0.8).unwrap()).unwrap();
    let (l1, _) = build_l1_spectral(&h1, &model).unwrap();
    let gen = l1.matrix() * c(0.7, 0.0);
    let rho0 = DensityMatrix::basis(3, 0);
    let out = gen.exp() * LiouvilleVector::from_operator(rho0.matrix()).coords();
    let rho = LiouvilleVector::from_coords(3, out).unwrap().to_operator();
    let state = DensityMatrix::new((&rho + rho.adjoint()) * c(0.5, 0.0)).unwrap();
    assert!(state.min_eigenvalue() > -1e-12);
    assert!((state.trace() - c(1.0, 0.0)).norm() < 1e-12);
}
