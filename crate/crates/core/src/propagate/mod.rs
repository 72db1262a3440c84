//! Time integration of the master equation, the coefficient equations in the
//! noise eigenbasis, and noiseless unitary evolution.

mod dopri;

pub use dopri::{solve, OdeStats, OdeSystem};

use crate::error::{Error, Result};
use crate::liouvillian::{BasisPath, NoiseTerm};
use crate::noise::{NoiseModel, TwoLevelCoefficients};
use crate::qcore::{
    commutator, eigendecompose, hermiticity_deviation, min_eigenvalue, CMatrix, CVector,
    DensityMatrix, HermitianOperator, TimeDependentOperator, C64,
};

/// Largest tolerated `|tr ρ - 1|`.
pub const TRACE_BOUND: f64 = 1e-8;
/// Asymmetry below this is removed at monitor points; above it the run fails.
pub const HERMITICITY_BOUND: f64 = 1e-10;
/// Most negative tolerated eigenvalue.
pub const POSITIVITY_BOUND: f64 = -1e-7;

/// Integrator tolerances and output spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Zero selects the step automatically.
    pub initial_step: f64,
    /// Spacing of recorded states; the horizon is always recorded.
    pub monitor_interval: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 0.0,
            monitor_interval: 0.1,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("max_step", self.max_step)?;
        positive("monitor_interval", self.monitor_interval)?;
        if !(self.initial_step >= 0.0) {
            return Err(Error::InvalidParameter(
                "initial_step must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Uniform monitor grid from `t0` to `t1` inclusive, in either direction.
    pub fn grid(&self, t0: f64, t1: f64) -> Vec<f64> {
        let span = t1 - t0;
        let intervals = ((span.abs() / self.monitor_interval).ceil() as usize).max(1);
        let mut g: Vec<f64> = (0..intervals)
            .map(|k| t0 + span * k as f64 / intervals as f64)
            .collect();
        g.push(t1);
        g
    }
}

/// Which conservation check failed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreachKind {
    Trace,
    Hermiticity,
    Positivity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breach {
    pub time: f64,
    pub kind: BreachKind,
    pub value: f64,
}

/// Conservation diagnostics of one recorded state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// States recorded along an integration with their diagnostics.
#[derive(Clone, Debug)]
pub struct PropagationRecord {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Vec<Diagnostics>,
    pub failure: Option<Breach>,
    pub stats: OdeStats,
}

impl PropagationRecord {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("record has at least one state")
    }

    pub fn max_trace_error(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.trace_error)
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.hermiticity_error)
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

fn flatten(m: &CMatrix) -> Vec<C64> {
    let d = m.nrows();
    (0..d * d).map(|k| m[(k / d, k % d)]).collect()
}

fn unflatten(d: usize, y: &[C64]) -> CMatrix {
    CMatrix::from_row_slice(d, d, y)
}

/// `ρ̇ = L0(ρ) + s·L1(ρ)` for time-dependent `H₀`, `H₁`, where the noise
/// term is re-evaluated at every stage time.
#[derive(Clone, Debug)]
pub struct MasterEquation {
    h0: TimeDependentOperator,
    h1: TimeDependentOperator,
    noise: NoiseTerm,
    noise_scale: f64,
    coherent: bool,
}

impl MasterEquation {
    pub fn new(
        h0: TimeDependentOperator,
        h1: TimeDependentOperator,
        noise: NoiseTerm,
    ) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::DimensionMismatch {
                expected: h0.dim(),
                found: h1.dim(),
            });
        }
        Ok(Self {
            h0,
            h1,
            noise,
            noise_scale: 1.0,
            coherent: true,
        })
    }

    /// Multiplies the noise generator by `scale` (which may be negative).
    pub fn with_noise_scale(mut self, scale: f64) -> Self {
        self.noise_scale = scale;
        self
    }

    /// Drops `L0`, leaving `ρ̇ = L1(ρ)`.
    pub fn without_coherent(mut self) -> Self {
        self.coherent = false;
        self
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn h0(&self) -> &TimeDependentOperator {
        &self.h0
    }

    pub fn h1(&self) -> &TimeDependentOperator {
        &self.h1
    }

    pub fn noise(&self) -> &NoiseTerm {
        &self.noise
    }

    /// `L1(t)` applied to `ρ` at unit scale.
    pub fn noise_action(&self, t: f64, rho: &CMatrix) -> Result<CMatrix> {
        let h1 = self.h1.matrix_at(t);
        match &self.noise {
            NoiseTerm::Diffusive(c) => {
                let inner = commutator(&h1, rho);
                Ok(&inner * C64::new(0.0, -c.j) - commutator(&h1, &inner) * C64::new(c.d, 0.0))
            }
            NoiseTerm::Poisson(model) => {
                if model.nu() == 0.0 {
                    return Ok(CMatrix::zeros(rho.nrows(), rho.ncols()));
                }
                let eig = eigendecompose(&HermitianOperator::new_unchecked(h1));
                let d = eig.dim();
                let v = &eig.vectors;
                let mut c = v.adjoint() * rho * v;
                for n in 0..d {
                    for m in 0..d {
                        c[(n, m)] *= if n == m {
                            C64::new(0.0, 0.0)
                        } else {
                            model.beta_eigenvalue(eig.values[n] - eig.values[m])?
                        };
                    }
                }
                Ok(v * c * v.adjoint())
            }
        }
    }

    /// Full right-hand side at time `t`.
    pub fn apply(&self, t: f64, rho: &CMatrix) -> Result<CMatrix> {
        let mut out = if self.noise_scale == 0.0 || self.noise.is_silent() {
            CMatrix::zeros(rho.nrows(), rho.ncols())
        } else {
            self.noise_action(t, rho)? * C64::new(self.noise_scale, 0.0)
        };
        if self.coherent {
            out += commutator(&self.h0.matrix_at(t), rho) * C64::new(0.0, -1.0);
        }
        Ok(out)
    }
}

impl OdeSystem for MasterEquation {
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let d = self.dim();
        let out = self.apply(t, &unflatten(d, y))?;
        dy.copy_from_slice(&flatten(&out));
        Ok(())
    }
}

/// Integrates `eq` from `ρ(0) = rho0` to `horizon`, recording on the monitor
/// grid. Conservation breaches are reported in the record, not as errors.
pub fn propagate(
    eq: &MasterEquation,
    rho0: &DensityMatrix,
    horizon: f64,
    cfg: &IntegrationConfig,
) -> Result<PropagationRecord> {
    if rho0.dim() != eq.dim() {
        return Err(Error::DimensionMismatch {
            expected: eq.dim(),
            found: rho0.dim(),
        });
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let d = eq.dim();
    let grid = cfg.grid(0.0, horizon);
    let mut record = PropagationRecord {
        times: Vec::with_capacity(grid.len()),
        states: Vec::with_capacity(grid.len()),
        diagnostics: Vec::with_capacity(grid.len()),
        failure: None,
        stats: OdeStats::default(),
    };
    let mut sys = eq.clone();
    let stats = solve(
        &mut sys,
        0.0,
        &flatten(rho0.matrix()),
        &grid,
        cfg,
        |_, t, y| {
            let mut m = unflatten(d, y);
            let asym = hermiticity_deviation(&m);
            if asym < HERMITICITY_BOUND {
                m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
                y.copy_from_slice(&flatten(&m));
            }
            let diag = Diagnostics {
                trace_error: (m.trace() - C64::new(1.0, 0.0)).norm(),
                hermiticity_error: asym,
                min_eigenvalue: min_eigenvalue(&m),
            };
            if record.failure.is_none() {
                let breach = if diag.trace_error > TRACE_BOUND {
                    Some((BreachKind::Trace, diag.trace_error))
                } else if asym >= HERMITICITY_BOUND {
                    Some((BreachKind::Hermiticity, asym))
                } else if diag.min_eigenvalue < POSITIVITY_BOUND {
                    Some((BreachKind::Positivity, diag.min_eigenvalue))
                } else {
                    None
                };
                record.failure = breach.map(|(kind, value)| Breach {
                    time: t,
                    kind,
                    value,
                });
            }
            record.times.push(t);
            record.states.push(DensityMatrix::new_unchecked(m));
            record.diagnostics.push(diag);
            Ok(())
        },
    )?;
    record.stats = stats;
    Ok(record)
}

/// Master equation with Poisson strikes.
pub fn integrate_master(
    h0: &TimeDependentOperator,
    h1: &TimeDependentOperator,
    model: &NoiseModel,
    rho0: &DensityMatrix,
    horizon: f64,
    cfg: &IntegrationConfig,
) -> Result<PropagationRecord> {
    let eq = MasterEquation::new(h0.clone(), h1.clone(), NoiseTerm::Poisson(model.clone()))?;
    propagate(&eq, rho0, horizon, cfg)
}

/// Two-level master equation `-i[H₀ + JH₁, ρ] - D[H₁, [H₁, ρ]]`.
pub fn integrate_two_level(
    h0: &TimeDependentOperator,
    h1: &TimeDependentOperator,
    coeffs: &TwoLevelCoefficients,
    rho0: &DensityMatrix,
    horizon: f64,
    cfg: &IntegrationConfig,
) -> Result<PropagationRecord> {
    if h0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h0.dim(),
        });
    }
    let eq = MasterEquation::new(h0.clone(), h1.clone(), NoiseTerm::Diffusive(*coeffs))?;
    propagate(&eq, rho0, horizon, cfg)
}

struct Schrodinger<'a> {
    h0: &'a TimeDependentOperator,
}

impl OdeSystem for Schrodinger<'_> {
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let d = self.h0.dim();
        let u = unflatten(d, y);
        let out = self.h0.matrix_at(t) * u * C64::new(0.0, -1.0);
        dy.copy_from_slice(&flatten(&out));
        Ok(())
    }
}

/// Propagators `U(t_k, t_from)` for each `t_k` in `times` (monotone away
/// from `t_from`, either direction).
pub fn propagators(
    h0: &TimeDependentOperator,
    t_from: f64,
    times: &[f64],
    cfg: &IntegrationConfig,
) -> Result<Vec<CMatrix>> {
    let d = h0.dim();
    let mut out = Vec::with_capacity(times.len());
    let mut sys = Schrodinger { h0 };
    solve(
        &mut sys,
        t_from,
        &flatten(&CMatrix::identity(d, d)),
        times,
        cfg,
        |_, _, y| {
            out.push(unflatten(d, y));
            Ok(())
        },
    )?;
    Ok(out)
}

/// Noiseless evolution of a pure state from `t_from` to `t_to`.
#[derive(Clone, Debug)]
pub struct UnitaryEvolution {
    pub state: CVector,
    pub propagator: CMatrix,
}

impl UnitaryEvolution {
    /// `U ρ U†`.
    pub fn evolve_density(&self, rho: &DensityMatrix) -> DensityMatrix {
        let u = &self.propagator;
        DensityMatrix::new_unchecked(u * rho.matrix() * u.adjoint())
    }
}

/// Evolves `psi` under `H₀` from `t_from` to `t_to` (either direction).
pub fn integrate_unitary(
    h0: &TimeDependentOperator,
    psi: &CVector,
    t_from: f64,
    t_to: f64,
    cfg: &IntegrationConfig,
) -> Result<UnitaryEvolution> {
    if psi.len() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: psi.len(),
        });
    }
    let propagator = if t_to == t_from {
        CMatrix::identity(h0.dim(), h0.dim())
    } else {
        propagators(h0, t_from, &[t_to], cfg)?.pop().unwrap()
    };
    Ok(UnitaryEvolution {
        state: &propagator * psi,
        propagator,
    })
}

/// Coefficients `d_{n,m}(t)` of `ρ` in the moving noise eigenbasis.
#[derive(Clone, Debug)]
pub struct CoefficientRecord {
    pub times: Vec<f64>,
    pub coefficients: Vec<CMatrix>,
}

impl CoefficientRecord {
    /// `ρ(t_k) = Σ d_{n,m} |φ_n(t_k)⟩⟨φ_m(t_k)|`.
    pub fn reconstruct(&self, path: &BasisPath, k: usize) -> Result<CMatrix> {
        let v = path.at(self.times[k])?.vectors;
        Ok(&v * &self.coefficients[k] * v.adjoint())
    }
}

struct CoefficientSystem<'a> {
    path: &'a BasisPath,
    h0: &'a TimeDependentOperator,
    noise: &'a NoiseTerm,
}

impl OdeSystem for CoefficientSystem<'_> {
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let d = self.h0.dim();
        let generator = self.path.generator(t, &self.h0.evaluate(t), self.noise)?;
        dy.copy_from_slice(&flatten(&generator.apply(&unflatten(d, y))));
        Ok(())
    }
}

/// Integrates the coefficient equations along `path` from `d0` at `t = 0`.
pub fn integrate_coefficients(
    path: &BasisPath,
    noise: &NoiseTerm,
    h0: &TimeDependentOperator,
    d0: &CMatrix,
    horizon: f64,
    cfg: &IntegrationConfig,
) -> Result<CoefficientRecord> {
    let d = h0.dim();
    if d0.nrows() != d || d0.ncols() != d || path.h1().dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: d0.nrows(),
        });
    }
    let grid = cfg.grid(0.0, horizon);
    let mut record = CoefficientRecord {
        times: Vec::new(),
        coefficients: Vec::new(),
    };
    let mut sys = CoefficientSystem { path, h0, noise };
    solve(&mut sys, 0.0, &flatten(d0), &grid, cfg, |_, t, y| {
        record.times.push(t);
        record.coefficients.push(unflatten(d, y));
        Ok(())
    })?;
    Ok(record)
}

#[cfg(test)]
mod tests;
