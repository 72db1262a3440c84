//! Control protocols and their noise Hamiltonians.
//!
//! Two-level Hamiltonians use the template
//! `H = ½ [[-Δ, Ω_R - iΩ_I], [Ω_R + iΩ_I, Δ]]` with Ω₀ = 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::{
    track_eigenframe, CMatrix, CVector, DensityMatrix, EigenFrame, TimeDependentOperator, C64,
};

/// Grid nodes used to track the eigenframe of a protocol.
const FRAME_POINTS: usize = 2001;

/// `½ [[-Δ, Ω_R - iΩ_I], [Ω_R + iΩ_I, Δ]]`.
pub fn two_level_hamiltonian(omega_r: f64, omega_i: f64, delta: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(-0.5 * delta, 0.0),
            C64::new(0.5 * omega_r, -0.5 * omega_i),
            C64::new(0.5 * omega_r, 0.5 * omega_i),
            C64::new(0.5 * delta, 0.0),
        ],
    )
}

/// Noise Hamiltonian choices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum H1Variant {
    /// `H₁ = H₀` (timing noise).
    SameAsH0,
    /// Absolute detuning error `Δ̃ = Ω₀` (two-level only).
    FrequencyError,
    /// Timing and frequency noise together: `Δ → Δ + cΔ̃` (two-level only).
    TimingFrequency { c: f64 },
    /// Fluctuations of the phase of `Ω₂₃` (STIRAP only).
    PhaseFluctuation,
}

/// A driven Hamiltonian over `[0, T]` whose eigenstate `label` is to be
/// followed adiabatically.
#[derive(Clone, Debug)]
pub struct Protocol {
    h0: TimeDependentOperator,
    horizon: f64,
    label: usize,
    frame: EigenFrame,
}

impl Protocol {
    fn new(h0: TimeDependentOperator, horizon: f64, label: usize) -> Result<Self> {
        let grid: Vec<f64> = (0..FRAME_POINTS)
            .map(|k| horizon * k as f64 / (FRAME_POINTS - 1) as f64)
            .collect();
        let frame = track_eigenframe(&h0, &grid)?;
        Ok(Self {
            h0,
            horizon,
            label,
            frame,
        })
    }

    pub fn h0(&self) -> &TimeDependentOperator {
        &self.h0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// Index of the followed eigenstate in the tracked frame.
    pub fn label(&self) -> usize {
        self.label
    }

    pub fn frame(&self) -> &EigenFrame {
        &self.frame
    }

    /// Followed eigenstate `φ(t)` in the tracked gauge.
    pub fn target_at(&self, t: f64) -> Result<CVector> {
        Ok(self
            .frame
            .align_at(&self.h0.evaluate(t), t)?
            .vector(self.label))
    }

    pub fn initial_state(&self) -> Result<CVector> {
        self.target_at(0.0)
    }

    pub fn target_state(&self) -> Result<CVector> {
        self.target_at(self.horizon)
    }

    pub fn initial_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(&self.initial_state()?)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "total time T must be positive, got {horizon}"
        )))
    }
}

/// `Ω_R = 2cos(Ωt)`, `Ω_I = 2sin(Ωt)`, `Δ = -1`, following `φ₊`.
pub fn phase_changing_scheme(omega: f64, horizon: f64) -> Result<Protocol> {
    check_horizon(horizon)?;
    if !omega.is_finite() {
        return Err(Error::InvalidParameter("Ω must be finite".into()));
    }
    let h0 = TimeDependentOperator::new(2, move |t| {
        two_level_hamiltonian(2.0 * (omega * t).cos(), 2.0 * (omega * t).sin(), -1.0)
    });
    Protocol::new(h0, horizon, 1)
}

/// `Ω_R = sin(πt/T)`, `Δ = -δ₀cos(πt/T)`, following `φ₊` from `|0⟩` to `|1⟩`.
pub fn rap_scheme(delta0: f64, horizon: f64) -> Result<Protocol> {
    check_horizon(horizon)?;
    if !(delta0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "δ₀ must be positive, got {delta0}"
        )));
    }
    let h0 = TimeDependentOperator::new(2, move |t| rap_matrix(delta0, horizon, t));
    Protocol::new(h0, horizon, 1)
}

fn rap_matrix(delta0: f64, horizon: f64, t: f64) -> CMatrix {
    let phase = PI * t / horizon;
    two_level_hamiltonian(phase.sin(), 0.0, -delta0 * phase.cos())
}

/// Noise Hamiltonian for the RAP scheme.
pub fn rap_noise_h1(
    delta0: f64,
    horizon: f64,
    variant: H1Variant,
) -> Result<TimeDependentOperator> {
    check_horizon(horizon)?;
    match variant {
        H1Variant::SameAsH0 => Ok(TimeDependentOperator::new(2, move |t| {
            rap_matrix(delta0, horizon, t)
        })),
        H1Variant::FrequencyError => Ok(TimeDependentOperator::new(2, |_| {
            two_level_hamiltonian(0.0, 0.0, 1.0)
        })),
        H1Variant::TimingFrequency { c } => {
            if !c.is_finite() {
                return Err(Error::InvalidParameter("coupling c must be finite".into()));
            }
            Ok(TimeDependentOperator::new(2, move |t| {
                rap_matrix(delta0, horizon, t) + two_level_hamiltonian(0.0, 0.0, c)
            }))
        }
        H1Variant::PhaseFluctuation => Err(Error::Unsupported(
            "phase fluctuation noise is defined for STIRAP".into(),
        )),
    }
}

/// Noise Hamiltonian for the phase-changing scheme (`H₁ = H₀` only).
pub fn phase_noise_h1(protocol: &Protocol, variant: H1Variant) -> Result<TimeDependentOperator> {
    match variant {
        H1Variant::SameAsH0 => Ok(protocol.h0().clone()),
        other => Err(Error::Unsupported(format!(
            "{other:?} is not defined for the phase-changing scheme"
        ))),
    }
}

/// `g(x) = exp[-(x/T)²/0.02]`.
fn stirap_envelope(x: f64, horizon: f64) -> f64 {
    (-(x / horizon).powi(2) / 0.02).exp()
}

/// `(Ω₁₂(t), Ω₂₃(t))`; `Ω₂₃` peaks first at `T(1/2 - τ)`.
pub fn stirap_pulses(horizon: f64, tau: f64, t: f64) -> (f64, f64) {
    (
        stirap_envelope(t - horizon * (0.5 + tau), horizon),
        stirap_envelope(t - horizon * (0.5 - tau), horizon),
    )
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "τ must lie in (0, 1/2), got {tau}"
        )))
    }
}

fn stirap_matrix(horizon: f64, tau: f64, t: f64) -> CMatrix {
    let (o12, o23) = stirap_pulses(horizon, tau, t);
    let z = C64::new(0.0, 0.0);
    let a = C64::new(0.5 * o12, 0.0);
    let b = C64::new(0.5 * o23, 0.0);
    CMatrix::from_row_slice(3, 3, &[z, a, z, a, z, b, z, b, z])
}

/// Three-level STIRAP Hamiltonian, following the dark state (middle label).
pub fn stirap_scheme(horizon: f64, tau: f64) -> Result<Protocol> {
    check_horizon(horizon)?;
    check_tau(tau)?;
    let h0 = TimeDependentOperator::new(3, move |t| stirap_matrix(horizon, tau, t));
    Protocol::new(h0, horizon, 1)
}

/// Dark state `(Ω₂₃, 0, -Ω₁₂)/sqrt(Ω₁₂² + Ω₂₃²)`.
pub fn stirap_dark_state(horizon: f64, tau: f64, t: f64) -> CVector {
    let (o12, o23) = stirap_pulses(horizon, tau, t);
    let norm = o12.hypot(o23);
    CVector::from_vec(vec![
        C64::new(o23 / norm, 0.0),
        C64::new(0.0, 0.0),
        C64::new(-o12 / norm, 0.0),
    ])
}

/// Noise Hamiltonian for STIRAP.
pub fn stirap_noise_h1(
    horizon: f64,
    tau: f64,
    variant: H1Variant,
) -> Result<TimeDependentOperator> {
    check_horizon(horizon)?;
    check_tau(tau)?;
    match variant {
        H1Variant::SameAsH0 => Ok(TimeDependentOperator::new(3, move |t| {
            stirap_matrix(horizon, tau, t)
        })),
        H1Variant::PhaseFluctuation => Ok(TimeDependentOperator::new(3, move |t| {
            let (_, o23) = stirap_pulses(horizon, tau, t);
            let mut m = CMatrix::zeros(3, 3);
            m[(1, 2)] = C64::new(0.0, 0.5 * o23);
            m[(2, 1)] = C64::new(0.0, -0.5 * o23);
            m
        })),
        other => Err(Error::Unsupported(format!(
            "{other:?} is not defined for STIRAP"
        ))),
    }
}

/// Which protocol a [`SchemeConfig`] describes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeKind {
    Phase { omega: f64 },
    Rap { delta0: f64 },
    Stirap { tau: f64 },
}

/// Protocol parameters together with the noise Hamiltonian choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub horizon: f64,
    pub h1: H1Variant,
}

/// A protocol with its noise Hamiltonian.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub protocol: Protocol,
    pub h1: TimeDependentOperator,
}

impl SchemeConfig {
    pub fn build(&self) -> Result<Scheme> {
        let (protocol, h1) = match self.kind {
            SchemeKind::Phase { omega } => {
                let p = phase_changing_scheme(omega, self.horizon)?;
                let h1 = phase_noise_h1(&p, self.h1)?;
                (p, h1)
            }
            SchemeKind::Rap { delta0 } => (
                rap_scheme(delta0, self.horizon)?,
                rap_noise_h1(delta0, self.horizon, self.h1)?,
            ),
            SchemeKind::Stirap { tau } => (
                stirap_scheme(self.horizon, tau)?,
                stirap_noise_h1(self.horizon, tau, self.h1)?,
            ),
        };
        Ok(Scheme { protocol, h1 })
    }
}
