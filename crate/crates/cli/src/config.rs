//! Experiment configuration: parsing, validation and sweep expansion.

use serde::{Deserialize, Serialize};
use shotnoise::liouvillian::NoiseTerm;
use shotnoise::noise::{NoiseModel, StrikeDistribution, TwoLevelCoefficients};
use shotnoise::propagate::IntegrationConfig;
use shotnoise::schemes::{H1Variant, SchemeConfig, SchemeKind};
use thiserror::Error;

/// A rejected configuration, located by its dotted field path.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    Phase,
    Rap,
    Stirap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum H1Id {
    #[default]
    SameAsH0,
    FrequencyError,
    TimingFrequency,
    PhaseFluctuation,
}

/// `[scheme]`: protocol and noise Hamiltonian. Times and frequencies are in
/// units of `Ω₀`; `tau` is a fraction of `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeId,
    pub horizon: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub h1: H1Id,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_omega() -> f64 {
    0.4
}
fn default_delta0() -> f64 {
    1.0
}
fn default_tau() -> f64 {
    0.1
}
fn default_c() -> f64 {
    1.0
}

/// `[noise.distribution]`: strike-strength law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSection {
    Laplace {
        scale: f64,
    },
    Gaussian {
        #[serde(default)]
        mean: f64,
        sigma: f64,
    },
    PointMass {
        value: f64,
    },
}

/// `[noise]`: either the two-level `(J, D)` pair or Poisson strikes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoiseSection {
    TwoLevel {
        j: f64,
        d: f64,
    },
    Poisson {
        nu: f64,
        distribution: DistributionSection,
    },
}

/// `[integration]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Zero means unbounded.
    pub max_step: f64,
    pub initial_step: f64,
    pub monitor_interval: f64,
    /// Uniform steps of the second-order strong-noise quadrature.
    pub strong_intervals: usize,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        let d = IntegrationConfig::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: 0.0,
            initial_step: d.initial_step,
            monitor_interval: d.monitor_interval,
            strong_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Fidelity,
    Purity,
    Populations,
    Coherences,
    /// Control fields of the protocol.
    Controls,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fidelity => "fidelity",
            Self::Purity => "purity",
            Self::Populations => "populations",
            Self::Coherences => "coherences",
            Self::Controls => "controls",
        }
    }
}

/// `[outputs]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_observables")]
    pub observables: Vec<Observable>,
}

fn default_observables() -> Vec<Observable> {
    vec![Observable::Fidelity]
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            observables: default_observables(),
        }
    }
}

/// How a configuration is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Numerical solution of the full master equation.
    #[default]
    Exact,
    /// `F(0) + F'(0)` from the weak-noise expansion.
    Weak,
    /// Solution of `ρ̇ = L1(ρ)` alone.
    Naive,
    /// Second-order strong-noise expansion.
    SecondOrder,
    /// Infinite-noise limit.
    StrongLimit,
}

/// `[[sweep]]`: one axis, given as explicit values or a log/linear range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    /// `[start, stop, points]`, geometric spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logspace: Option<(f64, f64, usize)>,
    /// `[start, stop, points]`, uniform spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<(f64, f64, usize)>,
}

/// Names accepted as sweep parameters.
pub const SWEEP_PARAMETERS: [&str; 13] = [
    "scheme.horizon",
    "scheme.omega",
    "scheme.delta0",
    "scheme.tau",
    "scheme.c",
    "noise.j",
    "noise.d",
    "noise.nu",
    "noise.distribution.scale",
    "noise.distribution.mean",
    "noise.distribution.sigma",
    "noise.distribution.value",
    "seed",
];

impl SweepAxis {
    /// Grid values; ranges are expanded.
    pub fn points(&self, path: &str) -> Result<Vec<f64>, ConfigError> {
        let given = [
            !self.values.is_empty(),
            self.logspace.is_some(),
            self.linspace.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(ConfigError::new(
                path,
                "give exactly one of values, logspace, linspace",
            ));
        }
        if let Some((a, b, n)) = self.logspace {
            if !(a > 0.0 && b > 0.0) || n < 2 {
                return Err(ConfigError::new(
                    format!("{path}.logspace"),
                    "needs positive bounds and at least two points",
                ));
            }
            let (la, lb) = (a.log10(), b.log10());
            return Ok((0..n)
                .map(|k| 10f64.powf(la + (lb - la) * k as f64 / (n - 1) as f64))
                .collect());
        }
        if let Some((a, b, n)) = self.linspace {
            if n < 2 {
                return Err(ConfigError::new(
                    format!("{path}.linspace"),
                    "needs at least two points",
                ));
            }
            return Ok((0..n)
                .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                .collect());
        }
        Ok(self.values.clone())
    }
}

/// A full experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: Method,
    pub scheme: SchemeSection,
    pub noise: NoiseSection,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

fn check(path: &str, ok: bool, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(path, message))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let span = e
                .span()
                .map(|s| format!(" (bytes {}..{})", s.start, s.end))
                .unwrap_or_default();
            ConfigError::new("config", format!("{}{span}", e.message()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Expands every sweep range into explicit values.
    pub fn resolved(&self) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        for (k, axis) in out.sweep.iter_mut().enumerate() {
            let values = axis.points(&format!("sweep[{k}]"))?;
            *axis = SweepAxis {
                parameter: axis.parameter.clone(),
                values,
                logspace: None,
                linspace: None,
            };
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.scheme;
        check(
            "scheme.horizon",
            s.horizon > 0.0 && s.horizon.is_finite(),
            "must be positive",
        )?;
        match s.kind {
            SchemeId::Phase => check("scheme.omega", s.omega >= 0.0, "must be non-negative")?,
            SchemeId::Rap => check("scheme.delta0", s.delta0 >= 0.0, "must be non-negative")?,
            SchemeId::Stirap => check(
                "scheme.tau",
                s.tau > 0.0 && s.tau < 0.5,
                "must lie in (0, 1/2)",
            )?,
        }
        check("scheme.c", s.c.is_finite(), "must be finite")?;
        let h1_ok = matches!(
            (s.kind, s.h1),
            (_, H1Id::SameAsH0)
                | (SchemeId::Rap, H1Id::FrequencyError | H1Id::TimingFrequency)
                | (SchemeId::Stirap, H1Id::PhaseFluctuation)
        );
        check("scheme.h1", h1_ok, "not defined for this scheme")?;

        match &self.noise {
            NoiseSection::TwoLevel { j, d } => {
                check("noise.j", j.is_finite(), "must be finite")?;
                check(
                    "noise.d",
                    *d >= 0.0 && d.is_finite(),
                    "must be non-negative",
                )?;
                check(
                    "noise.model",
                    s.kind != SchemeId::Stirap,
                    "two_level noise needs a two-level scheme",
                )?;
            }
            NoiseSection::Poisson { nu, distribution } => {
                check(
                    "noise.nu",
                    *nu >= 0.0 && nu.is_finite(),
                    "must be non-negative",
                )?;
                match distribution {
                    DistributionSection::Laplace { scale } => check(
                        "noise.distribution.scale",
                        *scale > 0.0 && scale.is_finite(),
                        "must be positive",
                    )?,
                    DistributionSection::Gaussian { mean, sigma } => {
                        check(
                            "noise.distribution.mean",
                            mean.is_finite(),
                            "must be finite",
                        )?;
                        check(
                            "noise.distribution.sigma",
                            *sigma > 0.0 && sigma.is_finite(),
                            "must be positive",
                        )?
                    }
                    DistributionSection::PointMass { value } => check(
                        "noise.distribution.value",
                        value.is_finite(),
                        "must be finite",
                    )?,
                }
            }
        }

        let i = &self.integration;
        check("integration.rel_tol", i.rel_tol > 0.0, "must be positive")?;
        check("integration.abs_tol", i.abs_tol > 0.0, "must be positive")?;
        check(
            "integration.max_step",
            i.max_step >= 0.0,
            "must be non-negative",
        )?;
        check(
            "integration.initial_step",
            i.initial_step >= 0.0,
            "must be non-negative",
        )?;
        check(
            "integration.monitor_interval",
            i.monitor_interval > 0.0,
            "must be positive",
        )?;
        check(
            "integration.strong_intervals",
            i.strong_intervals >= 2,
            "must be at least 2",
        )?;

        check(
            "outputs.observables",
            !self.outputs.observables.is_empty(),
            "must not be empty",
        )?;
        if self.method != Method::Exact {
            let allowed = |o: &Observable| match self.method {
                Method::Naive => !matches!(o, Observable::Controls),
                _ => matches!(o, Observable::Fidelity),
            };
            check(
                "outputs.observables",
                self.outputs.observables.iter().all(allowed),
                "this method only provides fidelity",
            )?;
        }
        if matches!(self.method, Method::SecondOrder | Method::StrongLimit) {
            let message = "strong-noise methods need a symmetric strike distribution";
            match &self.noise {
                NoiseSection::TwoLevel { j, .. } => check("noise.j", *j == 0.0, message)?,
                NoiseSection::Poisson { distribution, .. } => match distribution {
                    DistributionSection::Laplace { .. } => {}
                    DistributionSection::Gaussian { mean, .. } => {
                        check("noise.distribution.mean", *mean == 0.0, message)?
                    }
                    DistributionSection::PointMass { value } => {
                        check("noise.distribution.value", *value == 0.0, message)?
                    }
                },
            }
        }

        for (k, axis) in self.sweep.iter().enumerate() {
            let path = format!("sweep[{k}].parameter");
            check(
                &path,
                SWEEP_PARAMETERS.contains(&axis.parameter.as_str()),
                "unknown parameter",
            )?;
            let points = axis.points(&format!("sweep[{k}]"))?;
            for v in points {
                let mut probe = self.clone();
                probe.sweep.clear();
                probe
                    .set(&axis.parameter, v)
                    .map_err(|e| ConfigError::new(path.clone(), e.message))?;
                probe.validate().map_err(|e| {
                    ConfigError::new(format!("sweep[{k}]"), format!("value {v}: {e}"))
                })?;
            }
        }
        if self.sweep.len() > 2 {
            return Err(ConfigError::new("sweep", "at most two axes are supported"));
        }
        Ok(())
    }

    /// Sets a sweepable parameter.
    pub fn set(&mut self, parameter: &str, value: f64) -> Result<(), ConfigError> {
        let missing = || ConfigError::new(parameter, "not present in this configuration");
        match parameter {
            "seed" => {
                check(
                    parameter,
                    value >= 0.0 && value.fract() == 0.0,
                    "must be a non-negative integer",
                )?;
                self.seed = value as u64;
            }
            "scheme.horizon" => self.scheme.horizon = value,
            "scheme.omega" => self.scheme.omega = value,
            "scheme.delta0" => self.scheme.delta0 = value,
            "scheme.tau" => self.scheme.tau = value,
            "scheme.c" => self.scheme.c = value,
            "noise.j" | "noise.d" => match &mut self.noise {
                NoiseSection::TwoLevel { j, d } => {
                    *(if parameter == "noise.j" { j } else { d }) = value
                }
                _ => return Err(missing()),
            },
            "noise.nu" => match &mut self.noise {
                NoiseSection::Poisson { nu, .. } => *nu = value,
                _ => return Err(missing()),
            },
            _ => {
                let NoiseSection::Poisson { distribution, .. } = &mut self.noise else {
                    return Err(missing());
                };
                match (parameter, distribution) {
                    ("noise.distribution.scale", DistributionSection::Laplace { scale }) => {
                        *scale = value
                    }
                    ("noise.distribution.mean", DistributionSection::Gaussian { mean, .. }) => {
                        *mean = value
                    }
                    ("noise.distribution.sigma", DistributionSection::Gaussian { sigma, .. }) => {
                        *sigma = value
                    }
                    ("noise.distribution.value", DistributionSection::PointMass { value: v }) => {
                        *v = value
                    }
                    _ => return Err(missing()),
                }
            }
        }
        Ok(())
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let s = &self.scheme;
        let kind = match s.kind {
            SchemeId::Phase => SchemeKind::Phase { omega: s.omega },
            SchemeId::Rap => SchemeKind::Rap { delta0: s.delta0 },
            SchemeId::Stirap => SchemeKind::Stirap { tau: s.tau },
        };
        let h1 = match s.h1 {
            H1Id::SameAsH0 => H1Variant::SameAsH0,
            H1Id::FrequencyError => H1Variant::FrequencyError,
            H1Id::TimingFrequency => H1Variant::TimingFrequency { c: s.c },
            H1Id::PhaseFluctuation => H1Variant::PhaseFluctuation,
        };
        SchemeConfig {
            kind,
            horizon: s.horizon,
            h1,
        }
    }

    pub fn noise_model(&self) -> shotnoise::Result<Option<NoiseModel>> {
        let NoiseSection::Poisson { nu, distribution } = &self.noise else {
            return Ok(None);
        };
        let dist = match *distribution {
            DistributionSection::Laplace { scale } => StrikeDistribution::laplace(scale)?,
            DistributionSection::Gaussian { mean, sigma } => {
                StrikeDistribution::gaussian(mean, sigma)?
            }
            DistributionSection::PointMass { value } => StrikeDistribution::point_mass(value)?,
        };
        Ok(Some(NoiseModel::new(*nu, dist)?))
    }

    pub fn noise_term(&self) -> shotnoise::Result<NoiseTerm> {
        match &self.noise {
            NoiseSection::TwoLevel { j, d } => {
                Ok(NoiseTerm::Diffusive(TwoLevelCoefficients::new(*j, *d)?))
            }
            NoiseSection::Poisson { .. } => Ok(NoiseTerm::Poisson(
                self.noise_model()?.expect("poisson section"),
            )),
        }
    }

    pub fn integration_config(&self) -> IntegrationConfig {
        let i = &self.integration;
        IntegrationConfig {
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: if i.max_step > 0.0 {
                i.max_step
            } else {
                f64::INFINITY
            },
            initial_step: i.initial_step,
            monitor_interval: i.monitor_interval,
        }
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn sweep_points(&self) -> Result<Vec<Vec<f64>>, ConfigError> {
        let mut points = vec![Vec::new()];
        for (k, axis) in self.sweep.iter().enumerate() {
            let values = axis.points(&format!("sweep[{k}]"))?;
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }
}
