//! Analytic regimes: noiseless adiabatic following, the weak-noise
//! fidelity expansion, and the strong-noise limit with its naive and
//! second-order refinements.

use crate::error::{Error, Result};
use crate::liouvillian::{BasisPath, NoiseTerm};
use crate::propagate::{
    propagate, propagators, IntegrationConfig, MasterEquation, PropagationRecord,
};
use crate::qcore::{track_eigenframe, CMatrix, CVector, DensityMatrix, TimeDependentOperator, C64};
use crate::schemes::Protocol;

/// Populations below this are treated as a singular expansion point.
pub const MIN_EXPANSION_FIDELITY: f64 = 1e-6;

/// Grid nodes for adiabatic phases and frames.
const ADIABATIC_POINTS: usize = 4001;

/// `F = sqrt(⟨ψ|ρ|ψ⟩)` for a unit-norm target.
pub fn fidelity(rho: &DensityMatrix, target: &CVector) -> Result<f64> {
    if target.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: target.len(),
        });
    }
    if (target.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "target norm {} is not one",
            target.norm()
        )));
    }
    let p = rho.expectation(target);
    if p < -1e-10 {
        return Err(Error::InvalidState(format!("negative overlap {p:.3e}")));
    }
    Ok(p.max(0.0).sqrt())
}

/// Fidelity with the followed eigenstate along a recorded evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FidelityCurve {
    /// `F(t) = sqrt(⟨φ(t)|ρ(t)|φ(t)⟩)` with `φ` the protocol's target path.
    pub fn along(protocol: &Protocol, record: &PropagationRecord) -> Result<Self> {
        let values = record
            .times
            .iter()
            .zip(&record.states)
            .map(|(&t, rho)| fidelity(rho, &protocol.target_at(t)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: record.times.clone(),
            values,
        })
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("non-empty curve")
    }
}

/// Pure adiabatic state and its projector.
#[derive(Clone, Debug)]
pub struct AdiabaticState {
    pub psi: CVector,
    pub rho: DensityMatrix,
}

fn simpson(h: f64, f: &[f64]) -> Vec<f64> {
    // cumulative: trapezoid corrected to Simpson on every even node
    let mut out = vec![0.0; f.len()];
    for k in 1..f.len() {
        out[k] = if k % 2 == 0 {
            out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k])
        } else {
            out[k - 1] + 0.5 * h * (f[k - 1] + f[k])
        };
    }
    out
}

/// `ψ_ad(T) = Σ a_n exp(-i∫E_n) |φ_n(T)⟩` in the parallel-transport gauge,
/// for initial amplitudes `a_n` on the eigenstates of `H₀(0)`.
pub fn adiabatic_state(
    h0: &TimeDependentOperator,
    amplitudes: &[C64],
    horizon: f64,
) -> Result<AdiabaticState> {
    let d = h0.dim();
    if amplitudes.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: amplitudes.len(),
        });
    }
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("amplitudes have norm² {norm}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let n = ADIABATIC_POINTS;
    let h = horizon / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|k| h * k as f64).collect();
    let frame = track_eigenframe(h0, &grid)?;
    let mut psi = CVector::zeros(d);
    for (label, a) in amplitudes.iter().enumerate() {
        let energies: Vec<f64> = (0..n).map(|k| frame.value(k, label)).collect();
        let phase = *simpson(h, &energies).last().unwrap();
        psi += frame.vector(n - 1, label) * (a * C64::from_polar(1.0, -phase));
    }
    let rho = DensityMatrix::from_pure(&psi)?;
    Ok(AdiabaticState { psi, rho })
}

/// Weak-noise slope `F'(0)` together with the noiseless fidelity `F(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sensitivity {
    pub f0: f64,
    pub slope: f64,
}

/// `F'(0) = (1/2F(0)) ∫ ⟨⟨ρ̃(t)|L1(t)|ρ₀(t)⟩⟩ dt` where `ρ₀(t)` evolves
/// forwards from `rho0` and `ρ̃(t)` backwards from `|target⟩⟨target|` under
/// `H₀` alone. The noise term enters at unit strength, so the slope is with
/// respect to `D` (diffusive) or `ν` (Poisson strikes).
pub fn noise_sensitivity(
    h0: &TimeDependentOperator,
    h1: &TimeDependentOperator,
    noise: &NoiseTerm,
    rho0: &DensityMatrix,
    target: &CVector,
    horizon: f64,
    cfg: &IntegrationConfig,
) -> Result<Sensitivity> {
    let intervals = {
        let n = (horizon / 0.02).ceil() as usize;
        n.max(400).div_ceil(2) * 2
    };
    let h = horizon / intervals as f64;
    let grid: Vec<f64> = (0..=intervals).map(|k| h * k as f64).collect();
    let backward_grid: Vec<f64> = grid.iter().rev().cloned().collect();
    let forward = propagators(h0, 0.0, &grid[1..], cfg)?;
    let backward = propagators(h0, horizon, &backward_grid[1..], cfg)?;
    let d = h0.dim();
    let target_rho = target * target.adjoint();
    let eq = MasterEquation::new(h0.clone(), h1.clone(), noise.clone())?;

    let mut values = Vec::with_capacity(grid.len());
    for (k, &t) in grid.iter().enumerate() {
        let u = if k == 0 {
            CMatrix::identity(d, d)
        } else {
            forward[k - 1].clone()
        };
        let ub = if k == intervals {
            CMatrix::identity(d, d)
        } else {
            backward[intervals - 1 - k].clone()
        };
        let rho_t = &u * rho0.matrix() * u.adjoint();
        let tilde = &ub * &target_rho * ub.adjoint();
        let l1 = eq.noise_action(t, &rho_t)?;
        values.push((tilde.adjoint() * l1).trace().re);
    }
    let u_t = forward.last().unwrap();
    let f0_sq = (target.adjoint() * u_t * rho0.matrix() * u_t.adjoint() * target)[(0, 0)].re;
    let f0 = f0_sq.max(0.0).sqrt();
    if f0 < MIN_EXPANSION_FIDELITY {
        return Err(Error::SingularExpansion { fidelity: f0 });
    }
    let integral = *simpson(h, &values).last().unwrap();
    Ok(Sensitivity {
        f0,
        slope: integral / (2.0 * f0),
    })
}

/// `F(κ) ≈ F(0) + κF'(0)`.
pub fn weak_noise_fidelity(f0: f64, fprime0: f64, kappa: f64) -> f64 {
    f0 + kappa * fprime0
}

/// State pinned to the diagonal of the `H₁` eigenbasis.
#[derive(Clone, Debug)]
pub struct StrongNoiseLimit {
    /// `c_{n,n}(0)`.
    pub weights: Vec<f64>,
    pub rho_final: DensityMatrix,
    pub fidelity: f64,
    pub purity: f64,
    /// `H₁(0)` was degenerate and its basis was fixed by continuity.
    pub degenerate_start: bool,
}

fn require_symmetric(noise: &NoiseTerm) -> Result<()> {
    if noise.is_symmetric() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "strong-noise results need a symmetric strike distribution".into(),
        ))
    }
}

/// `ρ_∞(T) = Σ c_{n,n}(0) |φ_n(T)⟩⟨φ_n(T)|` for the eigenframe of `H₁`.
pub fn strong_noise_limit(
    path: &BasisPath,
    noise: &NoiseTerm,
    rho0: &DensityMatrix,
    target: &CVector,
) -> Result<StrongNoiseLimit> {
    require_symmetric(noise)?;
    let frame = path.frame();
    if let Some(k) = (1..frame.len()).find(|&k| frame.is_degenerate_at(k)) {
        return Err(Error::EigenCrossing {
            time: frame.times()[k],
        });
    }
    let start = path.initial()?;
    let end = path.at(*frame.times().last().unwrap())?;
    let d = start.dim();
    let weights: Vec<f64> = (0..d).map(|n| rho0.expectation(&start.vector(n))).collect();
    let mut rho = CMatrix::zeros(d, d);
    for (n, w) in weights.iter().enumerate() {
        let v = end.vector(n);
        rho += &v * v.adjoint() * C64::new(*w, 0.0);
    }
    let rho_final = DensityMatrix::new_unchecked(rho);
    Ok(StrongNoiseLimit {
        fidelity: fidelity(&rho_final, target)?,
        purity: weights.iter().map(|w| w * w).sum(),
        weights,
        rho_final,
        degenerate_start: frame.is_degenerate_at(0),
    })
}

/// Solution of `ρ̇ = L1(ρ)` with the coherent part dropped.
pub fn naive_strong_noise(
    h0: &TimeDependentOperator,
    h1: &TimeDependentOperator,
    noise: &NoiseTerm,
    rho0: &DensityMatrix,
    horizon: f64,
    cfg: &IntegrationConfig,
) -> Result<PropagationRecord> {
    let eq = MasterEquation::new(h0.clone(), h1.clone(), noise.clone())?.without_coherent();
    propagate(&eq, rho0, horizon, cfg)
}

/// Accumulated exponents `Λ̃_{n,m}(t)` and couplings `M_{nm,lk}(t)` on a
/// uniform grid, with the initial coefficients `c_{n,m}(0)`.
#[derive(Clone, Debug)]
pub struct StrongNoiseAccumulators {
    pub times: Vec<f64>,
    pub lambda: Vec<CMatrix>,
    /// Off-diagonal part of `M`, indexed `(n·dim + m, l·dim + k)`.
    pub coupling: Vec<CMatrix>,
    pub c0: CMatrix,
}

/// Builds the accumulators for `intervals` uniform steps over `[0, T]`.
pub fn strong_noise_accumulators(
    path: &BasisPath,
    noise: &NoiseTerm,
    h0: &TimeDependentOperator,
    rho0: &DensityMatrix,
    horizon: f64,
    intervals: usize,
) -> Result<StrongNoiseAccumulators> {
    if intervals < 2 {
        return Err(Error::InvalidParameter(
            "need at least two intervals".into(),
        ));
    }
    let d = h0.dim();
    let h = horizon / intervals as f64;
    let times: Vec<f64> = (0..=intervals).map(|k| h * k as f64).collect();
    let mut rates = Vec::with_capacity(times.len());
    let mut coupling = Vec::with_capacity(times.len());
    for &t in &times {
        let g = path.generator(t, &h0.evaluate(t), noise)?;
        let r = g.rates();
        if let Some(bad) = r.iter().find(|z| z.re > 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "growing strong-noise exponent {bad} at t = {t}"
            )));
        }
        let mut m = g.coupling();
        for i in 0..d * d {
            m[(i, i)] = C64::new(0.0, 0.0);
        }
        rates.push(r);
        coupling.push(m);
    }
    let mut lambda = vec![CMatrix::zeros(d, d)];
    for k in 1..times.len() {
        let next = &lambda[k - 1] + (&rates[k - 1] + &rates[k]) * C64::new(0.5 * h, 0.0);
        lambda.push(next);
    }
    let v0 = path.initial()?.vectors;
    let c0 = v0.adjoint() * rho0.matrix() * v0;
    Ok(StrongNoiseAccumulators {
        times,
        lambda,
        coupling,
        c0,
    })
}

/// `(φ₁(z), ψ(z)) = ((e^z - 1)/z, (e^z(z - 1) + 1)/z²)`.
fn fitted_weights(z: C64) -> (C64, C64) {
    if z.norm() < 0.1 {
        let mut phi = C64::new(0.0, 0.0);
        let mut psi = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0); // z^k / k!
        for k in 0..14 {
            phi += term / (k + 1) as f64;
            psi += term / (k + 2) as f64;
            term *= z / (k + 1) as f64;
        }
        (phi, psi)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e * (z - 1.0) + 1.0) / (z * z))
    }
}

impl StrongNoiseAccumulators {
    fn dim(&self) -> usize {
        self.c0.nrows()
    }

    /// Zeroth-order coefficients `c_{n,m}(0) exp Λ̃_{n,m}(t_j)` on the grid.
    fn zeroth(&self) -> Vec<CMatrix> {
        self.lambda
            .iter()
            .map(|l| self.c0.component_mul(&l.map(|z| z.exp())))
            .collect()
    }

    /// Solves `y_{n,m}(t) = ∫_0^t exp Λ̃_{n,m}(t,s) Σ M_{nm,lk}(s) x_{l,k}(s) ds`
    /// on the grid, exactly for piecewise-linear `Λ̃` and forcing.
    fn propagate_forcing(&self, x: &[CMatrix]) -> Vec<CMatrix> {
        let d = self.dim();
        let forcing: Vec<CMatrix> = x
            .iter()
            .zip(&self.coupling)
            .map(|(xj, m)| {
                let flat = CVector::from_iterator(d * d, xj.transpose().iter().cloned());
                let out = m * flat;
                CMatrix::from_row_slice(d, d, out.as_slice())
            })
            .collect();
        let mut y = vec![CMatrix::zeros(d, d)];
        for j in 0..self.times.len() - 1 {
            let h = self.times[j + 1] - self.times[j];
            let mut next = CMatrix::zeros(d, d);
            for n in 0..d {
                for m in 0..d {
                    let z = self.lambda[j + 1][(n, m)] - self.lambda[j][(n, m)];
                    let (phi, psi) = fitted_weights(z);
                    next[(n, m)] = z.exp() * y[j][(n, m)]
                        + forcing[j][(n, m)] * (psi * h)
                        + forcing[j + 1][(n, m)] * ((phi - psi) * h);
                }
            }
            y.push(next);
        }
        y
    }

    /// Coefficients at `T` to zeroth, first and second order.
    pub fn orders(&self) -> [CMatrix; 3] {
        let d0 = self.zeroth();
        let d1 = self.propagate_forcing(&d0);
        let d2 = self.propagate_forcing(&d1);
        [
            d0.last().unwrap().clone(),
            d1.last().unwrap().clone(),
            d2.last().unwrap().clone(),
        ]
    }
}

/// Second-order strong-noise approximation at `T`.
#[derive(Clone, Debug)]
pub struct SecondOrder {
    pub rho: CMatrix,
    pub fidelity: f64,
    /// Fidelity with the zeroth-order term alone.
    pub zeroth_fidelity: f64,
}

/// `d(T) ≈ d(0)e^{Λ̃(T)}` plus the single and nested integral corrections,
/// evaluated on `intervals` uniform steps.
#[allow(clippy::too_many_arguments)]
pub fn strong_noise_second_order(
    path: &BasisPath,
    noise: &NoiseTerm,
    h0: &TimeDependentOperator,
    rho0: &DensityMatrix,
    target: &CVector,
    horizon: f64,
    intervals: usize,
) -> Result<SecondOrder> {
    let acc = strong_noise_accumulators(path, noise, h0, rho0, horizon, intervals)?;
    let [d0, d1, d2] = acc.orders();
    let v = path.at(horizon)?.vectors;
    let reconstruct = |d: &CMatrix| {
        let m = &v * d * v.adjoint();
        DensityMatrix::new_unchecked((&m + m.adjoint()) * C64::new(0.5, 0.0))
    };
    let full = reconstruct(&(&d0 + &d1 + &d2));
    let overlap = |rho: &DensityMatrix| rho.expectation(target).max(0.0).sqrt();
    Ok(SecondOrder {
        fidelity: overlap(&full),
        zeroth_fidelity: overlap(&reconstruct(&d0)),
        rho: full.into_matrix(),
    })
}

#[cfg(test)]
mod tests;
