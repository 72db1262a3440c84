use super::{NoiseTerm, Superoperator, SuperoperatorKind};
use crate::error::{Error, Result};
use crate::qcore::{
    eigendecompose, track_eigenframe, CMatrix, EigenFrame, EigenSystem, HermitianOperator,
    LiouvilleVector, TimeDependentOperator, C64,
};

/// Eigenbasis of `H₁` with the `L1` eigenvalues `β_{n,m}` on
/// `|B_{n,m}⟩⟩ = |φ_n⟩⟨φ_m|`.
#[derive(Clone, Debug)]
pub struct NoiseEigenbasis {
    system: EigenSystem,
    betas: CMatrix,
}

impl NoiseEigenbasis {
    pub fn new(system: EigenSystem, noise: &NoiseTerm) -> Result<Self> {
        let d = system.dim();
        let mut betas = CMatrix::zeros(d, d);
        for n in 0..d {
            for m in 0..d {
                if n != m {
                    betas[(n, m)] = noise.beta(system.values[n] - system.values[m])?;
                }
            }
        }
        Ok(Self { system, betas })
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn system(&self) -> &EigenSystem {
        &self.system
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.system.vectors
    }

    pub fn betas(&self) -> &CMatrix {
        &self.betas
    }

    /// `|B_{n,m}⟩⟩`.
    pub fn projector(&self, n: usize, m: usize) -> LiouvilleVector {
        let a = self.system.vector(n);
        let b = self.system.vector(m);
        LiouvilleVector::from_operator(&(a * b.adjoint()))
    }

    /// Dense `Σ β_{n,m} |B_{n,m}⟩⟩⟨⟨B_{n,m}|`.
    pub fn superoperator(&self) -> Superoperator {
        let d = self.dim();
        let mut m = CMatrix::zeros(d * d, d * d);
        for n in 0..d {
            for k in 0..d {
                let beta = self.betas[(n, k)];
                if beta == C64::new(0.0, 0.0) {
                    continue;
                }
                let b = self.projector(n, k);
                m += b.coords() * b.coords().adjoint() * beta;
            }
        }
        Superoperator {
            dim: d,
            matrix: m,
            kind: SuperoperatorKind::L1,
        }
    }

    /// `V (β ∘ V†ρV) V†` without forming the superoperator.
    pub fn apply_operator(&self, rho: &CMatrix) -> CMatrix {
        let v = &self.system.vectors;
        let c = v.adjoint() * rho * v;
        v * c.component_mul(&self.betas) * v.adjoint()
    }

    /// Coefficients `d_{n,m} = ⟨φ_n|ρ|φ_m⟩`.
    pub fn coefficients(&self, rho: &CMatrix) -> CMatrix {
        let v = &self.system.vectors;
        v.adjoint() * rho * v
    }

    /// `ρ = Σ d_{n,m} |φ_n⟩⟨φ_m|`.
    pub fn reconstruct(&self, d: &CMatrix) -> CMatrix {
        let v = &self.system.vectors;
        v * d * v.adjoint()
    }
}

/// Phase-continuous eigenframe of a time-dependent `H₁`, evaluable at any
/// time, with frame derivatives by central differences.
#[derive(Clone, Debug)]
pub struct BasisPath {
    h1: TimeDependentOperator,
    frame: EigenFrame,
    step: f64,
}

impl BasisPath {
    /// Tracks `H₁` on a uniform grid of `points` nodes over `[0, horizon]`.
    pub fn new(h1: TimeDependentOperator, horizon: f64, points: usize) -> Result<Self> {
        if !(horizon > 0.0) || points < 2 {
            return Err(Error::InvalidParameter(
                "basis path needs a positive horizon and two grid points".into(),
            ));
        }
        let grid: Vec<f64> = (0..points)
            .map(|k| horizon * k as f64 / (points - 1) as f64)
            .collect();
        let frame = track_eigenframe(&h1, &grid)?;
        let step = 1e-5 * horizon.max(1.0) / (points as f64).sqrt().max(1.0);
        Ok(Self { h1, frame, step })
    }

    pub fn h1(&self) -> &TimeDependentOperator {
        &self.h1
    }

    pub fn frame(&self) -> &EigenFrame {
        &self.frame
    }

    /// Eigensystem of `H₁(t)` in the path gauge.
    pub fn at(&self, t: f64) -> Result<EigenSystem> {
        self.frame.align_at(&self.h1.evaluate(t), t)
    }

    /// Eigensystem at `t = 0`. When `H₁(0)` is degenerate the basis is the
    /// limit from `t → 0⁺`, taken at a point just inside the horizon.
    pub fn initial(&self) -> Result<EigenSystem> {
        let t0 = self.frame.times()[0];
        if !self.frame.is_degenerate_at(0) {
            return self.at(t0);
        }
        let span = self.frame.times().last().unwrap() - t0;
        for scale in [1e-7, 1e-6, 1e-5, 1e-4] {
            let t = t0 + scale * span;
            let raw = self.h1.evaluate(t);
            if !eigendecompose(&raw).is_degenerate() {
                return self.frame.align_at(&raw, t);
            }
        }
        self.at(t0)
    }

    /// Eigensystem at `t` together with `K = V†V̇`.
    pub fn with_derivative(&self, t: f64) -> Result<(EigenSystem, CMatrix)> {
        let mid = self.at(t)?;
        let h = self.step;
        let plus = self.frame.align_at(&self.h1.evaluate(t + h), t + h)?;
        let minus = self.frame.align_at(&self.h1.evaluate(t - h), t - h)?;
        let vdot = (&plus.vectors - &minus.vectors) / C64::new(2.0 * h, 0.0);
        let k = mid.vectors.adjoint() * vdot;
        Ok((mid, k))
    }

    pub fn noise_basis(&self, t: f64, noise: &NoiseTerm) -> Result<NoiseEigenbasis> {
        NoiseEigenbasis::new(self.at(t)?, noise)
    }

    /// Coefficient generator at time `t` for `H₀(t)`.
    pub fn generator(
        &self,
        t: f64,
        h0: &HermitianOperator,
        noise: &NoiseTerm,
    ) -> Result<EigenbasisGenerator> {
        let (system, k) = self.with_derivative(t)?;
        let basis = NoiseEigenbasis::new(system, noise)?;
        Ok(eigenbasis_rhs(&basis, h0, &k))
    }
}

/// Linear coefficient equation `ḋ = β∘d - (K + ih)d - d(K† - ih)` with
/// `h = V†H₀V` and `K = V†V̇`.
#[derive(Clone, Debug)]
pub struct EigenbasisGenerator {
    betas: CMatrix,
    h: CMatrix,
    k: CMatrix,
}

/// Coefficient generator for `basis`, `H₀` and the frame derivative `K`.
pub fn eigenbasis_rhs(
    basis: &NoiseEigenbasis,
    h0: &HermitianOperator,
    k: &CMatrix,
) -> EigenbasisGenerator {
    let v = basis.vectors();
    EigenbasisGenerator {
        betas: basis.betas().clone(),
        h: v.adjoint() * h0.matrix() * v,
        k: k.clone(),
    }
}

impl EigenbasisGenerator {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn betas(&self) -> &CMatrix {
        &self.betas
    }

    pub fn apply(&self, d: &CMatrix) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let left = &self.k + &self.h * i;
        let right = self.k.adjoint() - &self.h * i;
        d.component_mul(&self.betas) - left * d - d * right
    }

    /// Coupling `M_{nm,lk} = ⟨⟨B_{n,m}|L0|B_{l,k}⟩⟩ - ⟨⟨B_{n,m}|Ḃ_{l,k}⟩⟩`,
    /// indexed `(n·dim + m, l·dim + k)`.
    pub fn coupling(&self) -> CMatrix {
        let d = self.dim();
        let i = C64::new(0.0, 1.0);
        let mut m = CMatrix::zeros(d * d, d * d);
        for n in 0..d {
            for mm in 0..d {
                for l in 0..d {
                    for k in 0..d {
                        let mut v = C64::new(0.0, 0.0);
                        if k == mm {
                            v -= self.k[(n, l)] + i * self.h[(n, l)];
                        }
                        if l == n {
                            v += i * self.h[(k, mm)] - self.k[(mm, k)].conj();
                        }
                        m[(n * d + mm, l * d + k)] = v;
                    }
                }
            }
        }
        m
    }

    /// Diagonal rates `β_{n,m} + M_{nm,nm}`, keeping only the gauge part
    /// `i·Im K_nn` of the frame derivative.
    pub fn rates(&self) -> CMatrix {
        let d = self.dim();
        let i = C64::new(0.0, 1.0);
        CMatrix::from_fn(d, d, |n, m| {
            self.betas[(n, m)]
                - i * (self.h[(n, n)].re - self.h[(m, m)].re)
                - i * (self.k[(n, n)].im - self.k[(m, m)].im)
        })
    }
}
