//! Strike-strength distributions and the Poisson noise model.
//!
//! A strike of strength `ξ` (a time) acts on the state as `exp(-iξH₁)`.
//! Strikes arrive at rate `ν`; everything the master equation needs from the
//! distribution enters through its characteristic function
//! `C(x) = ⟨exp(iξx)⟩` or equivalently its raw moments.

pub mod quadrature;
mod sampling;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub use sampling::{sample_strikes, strike_stream, Strike};

use crate::error::{Error, Result};
use crate::qcore::C64;

/// Absolute tolerance for quadrature over strike strengths.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Moment series stop once a term contributes less than this, relatively.
pub const SERIES_REL_TOL: f64 = 1e-12;
/// Hard cap on the number of moment-series terms.
pub const SERIES_MAX_TERMS: u32 = 60;

type CharacteristicFn = dyn Fn(f64) -> C64 + Send + Sync;
type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A distribution known through a moment table, optionally with a closed-form
/// characteristic function and a density.
#[derive(Clone)]
pub struct CustomDistribution {
    /// `moments[s - 1] = ⟨ξ^s⟩`.
    moments: Vec<f64>,
    characteristic: Option<Arc<CharacteristicFn>>,
    density: Option<Arc<DensityFn>>,
}

impl CustomDistribution {
    pub fn from_moments(moments: Vec<f64>) -> Self {
        Self {
            moments,
            characteristic: None,
            density: None,
        }
    }

    pub fn with_characteristic<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        self.characteristic = Some(Arc::new(f));
        self
    }

    pub fn with_density<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.density = Some(Arc::new(f));
        self
    }
}

impl fmt::Debug for CustomDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDistribution")
            .field("moments", &self.moments)
            .field("characteristic", &self.characteristic.is_some())
            .field("density", &self.density.is_some())
            .finish()
    }
}

/// Probability law `P(ξ)` of strike strengths. All parameters are times.
#[derive(Clone, Debug)]
pub enum StrikeDistribution {
    /// `P(ξ) = exp(-|ξ|/A) / 2A`.
    Laplace {
        scale: f64,
    },
    Gaussian {
        mean: f64,
        sigma: f64,
    },
    PointMass {
        value: f64,
    },
    Custom(CustomDistribution),
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl StrikeDistribution {
    pub fn laplace(scale: f64) -> Result<Self> {
        check_finite("laplace scale", scale)?;
        if scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "laplace scale must be positive, got {scale}"
            )));
        }
        Ok(Self::Laplace { scale })
    }

    pub fn gaussian(mean: f64, sigma: f64) -> Result<Self> {
        check_finite("gaussian mean", mean)?;
        check_finite("gaussian sigma", sigma)?;
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self::Gaussian { mean, sigma })
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        check_finite("point-mass value", value)?;
        Ok(Self::PointMass { value })
    }

    /// `C(x) = ⟨exp(iξx)⟩`.
    pub fn characteristic_function(&self, x: f64) -> Result<C64> {
        if x == 0.0 {
            return Ok(C64::new(1.0, 0.0));
        }
        Ok(match self {
            Self::Laplace { scale } => C64::new(1.0 / (1.0 + scale * scale * x * x), 0.0),
            Self::Gaussian { mean, sigma } => {
                C64::from_polar((-0.5 * sigma * sigma * x * x).exp(), mean * x)
            }
            Self::PointMass { value } => C64::from_polar(1.0, value * x),
            Self::Custom(custom) => match &custom.characteristic {
                Some(f) => f(x),
                None => moment_series(
                    |s| self.moment(s),
                    |s| C64::new(0.0, x).powu(s) / factorial(s),
                )?
                .map_or_else(
                    || {
                        Err(Error::SeriesDivergence(format!(
                            "characteristic function at x = {x}"
                        )))
                    },
                    |sum| Ok(C64::new(1.0, 0.0) + sum),
                )?,
            },
        })
    }

    /// Raw moment `⟨ξ^s⟩`.
    pub fn moment(&self, s: u32) -> Result<f64> {
        if s == 0 {
            return Ok(1.0);
        }
        Ok(match self {
            Self::Laplace { scale } => {
                if s % 2 == 1 {
                    0.0
                } else {
                    factorial(s) * scale.powi(s as i32)
                }
            }
            Self::Gaussian { mean, sigma } => {
                // m_s = μ m_{s-1} + (s-1) σ² m_{s-2}
                let (mut prev, mut cur) = (1.0, *mean);
                for k in 2..=s {
                    let next = mean * cur + (k - 1) as f64 * sigma * sigma * prev;
                    prev = cur;
                    cur = next;
                }
                cur
            }
            Self::PointMass { value } => value.powi(s as i32),
            Self::Custom(custom) => *custom
                .moments
                .get(s as usize - 1)
                .ok_or(Error::DivergentMoment { order: s })?,
        })
    }

    /// Probability density, when one exists.
    pub fn density(&self, xi: f64) -> Option<f64> {
        match self {
            Self::Laplace { scale } => Some((-xi.abs() / scale).exp() / (2.0 * scale)),
            Self::Gaussian { mean, sigma } => {
                let z = (xi - mean) / sigma;
                Some((-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma))
            }
            Self::PointMass { .. } => None,
            Self::Custom(custom) => custom.density.as_ref().map(|f| f(xi)),
        }
    }

    /// `P(ξ) = P(-ξ)`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Laplace { .. } => true,
            Self::Gaussian { mean, .. } => *mean == 0.0,
            Self::PointMass { value } => *value == 0.0,
            Self::Custom(custom) => custom.moments.iter().step_by(2).all(|m| *m == 0.0),
        }
    }

    /// Centre and width used to map quadrature onto the real line.
    fn quadrature_window(&self) -> (f64, f64) {
        match self {
            Self::Laplace { scale } => (0.0, *scale),
            Self::Gaussian { mean, sigma } => (*mean, *sigma),
            Self::PointMass { value } => (*value, 1.0),
            Self::Custom(_) => {
                let m1 = self.moment(1).unwrap_or(0.0);
                let m2 = self.moment(2).unwrap_or(1.0);
                (m1, (m2 - m1 * m1).max(1e-300).sqrt())
            }
        }
    }

    /// `∫ P(ξ) f(ξ) dξ` for an `n`-component integrand; exact for a point mass.
    pub fn expectation<F>(&self, n: usize, mut f: F) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &mut [f64]),
    {
        if let Self::PointMass { value } = self {
            let mut out = vec![0.0; n];
            f(*value, &mut out);
            return Ok(out);
        }
        if self.density(0.0).is_none() {
            return Err(Error::Unsupported(
                "distribution has no density for quadrature".into(),
            ));
        }
        let (center, scale) = self.quadrature_window();
        let mut weighted = |xi: f64, out: &mut [f64]| {
            let p = self.density(xi).unwrap_or(0.0);
            if p == 0.0 {
                out.iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            f(xi, out);
            out.iter_mut().for_each(|v| *v *= p);
        };
        quadrature::integrate_real_line(&mut weighted, center, scale, n, QUADRATURE_TOL)
    }
}

fn factorial(s: u32) -> f64 {
    (1..=s).map(f64::from).product()
}

/// Sums `Σ_{s≥1} term(s) · moment(s)` until two consecutive terms fall below
/// [`SERIES_REL_TOL`] relative to the running sum. Returns `None` when the
/// sum has not settled within [`SERIES_MAX_TERMS`].
fn moment_series<M, T>(moment: M, coefficient: T) -> Result<Option<C64>>
where
    M: Fn(u32) -> Result<f64>,
    T: Fn(u32) -> C64,
{
    let mut sum = C64::new(0.0, 0.0);
    let mut small_run = 0;
    for s in 1..=SERIES_MAX_TERMS {
        let term = coefficient(s) * moment(s)?;
        sum += term;
        if !sum.re.is_finite() || !sum.im.is_finite() {
            return Ok(None);
        }
        if term.norm() <= SERIES_REL_TOL * sum.norm().max(f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run >= 2 {
                return Ok(Some(sum));
            }
        } else {
            small_run = 0;
        }
    }
    Ok(None)
}

/// Strike rate `ν` (1/time) together with the strike-strength law.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    nu: f64,
    distribution: StrikeDistribution,
}

impl NoiseModel {
    pub fn new(nu: f64, distribution: StrikeDistribution) -> Result<Self> {
        check_finite("nu", nu)?;
        if nu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "strike rate must be non-negative, got {nu}"
            )));
        }
        Ok(Self { nu, distribution })
    }

    /// Laplace strikes with `A = sqrt(D̃/ν)`, which tend to Gaussian white
    /// noise of strength `D̃` as `ν → ∞`.
    pub fn laplace_gaussian_limit(nu: f64, d_tilde: f64) -> Result<Self> {
        if nu <= 0.0 || d_tilde <= 0.0 {
            return Err(Error::InvalidParameter("nu and D̃ must be positive".into()));
        }
        Self::new(nu, StrikeDistribution::laplace((d_tilde / nu).sqrt())?)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn distribution(&self) -> &StrikeDistribution {
        &self.distribution
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        Self::new(nu, self.distribution.clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.distribution.is_symmetric()
    }

    /// `ν [C(-gap) - 1]`, the eigenvalue of the noise superoperator on
    /// `|φ_n⟩⟨φ_m|` with `gap = E_n - E_m`.
    pub fn beta_eigenvalue(&self, gap: f64) -> Result<C64> {
        if self.nu == 0.0 || gap == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok((self.distribution.characteristic_function(-gap)? - 1.0) * self.nu)
    }

    /// Same eigenvalue from the moment series `ν Σ (-i gap)^s ⟨ξ^s⟩ / s!`.
    pub fn beta_series(&self, gap: f64) -> Result<C64> {
        if self.nu == 0.0 || gap == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let sum = moment_series(
            |s| self.distribution.moment(s),
            |s| C64::new(0.0, -gap).powu(s) / factorial(s),
        )?
        .ok_or_else(|| Error::SeriesDivergence(format!("beta series at gap {gap}")))?;
        Ok(sum * self.nu)
    }

    /// `(J̃, D̃) = (ν⟨ξ⟩, ν⟨ξ²⟩/2)`.
    pub fn gaussian_limit_map(&self) -> Result<(f64, f64)> {
        Ok((
            self.nu * self.distribution.moment(1)?,
            0.5 * self.nu * self.distribution.moment(2)?,
        ))
    }
}

/// Noise bias `J` (dimensionless) and strength `D` (time) of the two-level
/// master equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelCoefficients {
    pub j: f64,
    pub d: f64,
}

impl TwoLevelCoefficients {
    pub fn new(j: f64, d: f64) -> Result<Self> {
        check_finite("J", j)?;
        check_finite("D", d)?;
        if d < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise strength D must be non-negative, got {d}"
            )));
        }
        Ok(Self { j, d })
    }

    /// `β = -iJ·gap - D·gap²` for a gap between `H₁` eigenvalues.
    pub fn beta(&self, gap: f64) -> C64 {
        C64::new(-self.d * gap * gap, -self.j * gap)
    }
}

/// Two-level `J` and `D` for the noise model at `χ = (E_±⁽¹⁾)²`.
///
/// Uses the moment series when the strike phase `2√χ·sqrt⟨ξ²⟩` is small and
/// the characteristic function otherwise; both are exact representations of
/// the defining integrals.
pub fn two_level_jd(model: &NoiseModel, chi: f64) -> Result<TwoLevelCoefficients> {
    check_finite("chi", chi)?;
    if chi < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "chi must be non-negative, got {chi}"
        )));
    }
    let nu = model.nu();
    if nu == 0.0 {
        return TwoLevelCoefficients::new(0.0, 0.0);
    }
    let dist = model.distribution();
    if chi == 0.0 {
        return TwoLevelCoefficients::new(nu * dist.moment(1)?, 0.5 * nu * dist.moment(2)?);
    }
    let root = chi.sqrt();
    let phase = match dist.moment(2) {
        Ok(m2) => 2.0 * root * m2.abs().sqrt(),
        Err(_) => f64::INFINITY,
    };
    if phase < 0.5 {
        if let Ok(series) = two_level_jd_series(model, chi) {
            return Ok(series);
        }
    }
    let cf = dist.characteristic_function(2.0 * root)?;
    let j = nu * cf.im / (2.0 * root);
    let d = nu * (1.0 - cf.re) / (4.0 * chi);
    TwoLevelCoefficients::new(j, d.max(0.0))
}

/// Two-level `J` and `D` by quadrature of the `sin` and `sin²` integrands.
pub fn two_level_jd_quadrature(model: &NoiseModel, chi: f64) -> Result<TwoLevelCoefficients> {
    if chi <= 0.0 {
        return Err(Error::InvalidParameter(
            "quadrature form needs chi > 0".into(),
        ));
    }
    let root = chi.sqrt();
    let v = model.distribution().expectation(2, |xi, out| {
        out[0] = (2.0 * xi * root).sin();
        let s = (xi * root).sin();
        out[1] = s * s;
    })?;
    let nu = model.nu();
    TwoLevelCoefficients::new(nu * v[0] / (2.0 * root), (nu * v[1] / (2.0 * chi)).max(0.0))
}

/// Two-level `J` and `D` from the odd and even moment sums.
pub fn two_level_jd_series(model: &NoiseModel, chi: f64) -> Result<TwoLevelCoefficients> {
    let dist = model.distribution();
    // J = ν Σ_l (-4χ)^l ⟨ξ^{2l+1}⟩ / (2l+1)!
    let j = moment_series(
        |s| if s % 2 == 1 { dist.moment(s) } else { Ok(0.0) },
        |s| {
            if s % 2 == 1 {
                C64::new((-4.0 * chi).powi(((s - 1) / 2) as i32) / factorial(s), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        },
    )?;
    // D = -ν Σ_k (-1)^k (4χ)^{k-1} ⟨ξ^{2k}⟩ / (2k)!
    let d = moment_series(
        |s| if s % 2 == 0 { dist.moment(s) } else { Ok(0.0) },
        |s| {
            if s % 2 == 0 {
                let k = (s / 2) as i32;
                C64::new(
                    -(-1.0_f64).powi(k) * (4.0 * chi).powi(k - 1) / factorial(s),
                    0.0,
                )
            } else {
                C64::new(0.0, 0.0)
            }
        },
    )?;
    let jd = j
        .zip(d)
        .ok_or_else(|| Error::SeriesDivergence(format!("two-level J/D series at chi = {chi}")))?;
    TwoLevelCoefficients::new(model.nu() * jd.0.re, (model.nu() * jd.1.re).max(0.0))
}
