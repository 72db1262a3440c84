//! Parameter grids of the published figures.

use std::path::{Path, PathBuf};

use crate::config::{
    DistributionSection, ExperimentConfig, H1Id, IntegrationSection, Method, NoiseSection,
    Observable, OutputsSection, SchemeId, SchemeSection, SweepAxis,
};
use crate::runner::{run_config, RunError};

pub const FIGURES: [&str; 12] = [
    "fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6a",
    "fig6b", "fig6c",
];

/// One emitted curve or surface.
#[derive(Clone, Debug)]
pub struct Curve {
    pub name: String,
    pub config: ExperimentConfig,
}

fn scheme(kind: SchemeId, horizon: f64) -> SchemeSection {
    SchemeSection {
        kind,
        horizon,
        omega: 0.4,
        delta0: 1.0,
        tau: 0.1,
        h1: H1Id::SameAsH0,
        c: 1.0,
    }
}

fn base(scheme: SchemeSection, noise: NoiseSection) -> ExperimentConfig {
    ExperimentConfig {
        seed: 0,
        method: Method::Exact,
        scheme,
        noise,
        integration: IntegrationSection::default(),
        outputs: OutputsSection::default(),
        sweep: Vec::new(),
    }
}

fn axis(parameter: &str, values: Vec<f64>) -> SweepAxis {
    SweepAxis {
        parameter: parameter.into(),
        values,
        logspace: None,
        linspace: None,
    }
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.log10(), b.log10());
    (0..n)
        .map(|k| 10f64.powf(la + (lb - la) * k as f64 / (n - 1) as f64))
        .collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Noise strength `DΩ₀` axis of the RAP figures.
pub fn rap_d_axis() -> Vec<f64> {
    logspace(1e-3, 1e3, 25)
}

/// Strike frequency `ν/Ω₀` axis of the STIRAP figures.
pub fn stirap_nu_axis() -> Vec<f64> {
    logspace(1e-3, 1e2, 21)
}

fn gaussian(nu: f64, sigma: f64) -> NoiseSection {
    NoiseSection::Poisson {
        nu,
        distribution: DistributionSection::Gaussian { mean: 0.0, sigma },
    }
}

fn with_method(cfg: &ExperimentConfig, method: Method) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.method = method;
    c
}

fn phase_curves(pairs: &[(f64, f64)], label: &str) -> Vec<Curve> {
    pairs
        .iter()
        .map(|&(j, d)| {
            let value = if label == "j" { j } else { d };
            Curve {
                name: format!("{label}_{value}"),
                config: base(
                    scheme(SchemeId::Phase, 20.0),
                    NoiseSection::TwoLevel { j, d },
                ),
            }
        })
        .collect()
}

fn rap_d_sweep(delta0: f64, h1: H1Id, methods: &[Method]) -> Vec<Curve> {
    let mut s = scheme(SchemeId::Rap, 20.0);
    s.delta0 = delta0;
    s.h1 = h1;
    let mut cfg = base(s, NoiseSection::TwoLevel { j: 0.0, d: 0.0 });
    cfg.integration.monitor_interval = 1.0;
    let d_axis = rap_d_axis();
    methods
        .iter()
        .map(|&m| {
            let mut c = with_method(&cfg, m);
            let values = if m == Method::SecondOrder {
                d_axis.iter().cloned().filter(|&d| d >= 1.0).collect()
            } else {
                d_axis.clone()
            };
            c.sweep = vec![axis("noise.d", values)];
            Curve {
                name: format!("delta0_{delta0}_{}", method_name(m)),
                config: c,
            }
        })
        .collect()
}

fn stirap_nu_sweep(horizon: f64, sigma: f64, methods: &[Method], tag: &str) -> Vec<Curve> {
    let mut cfg = base(scheme(SchemeId::Stirap, horizon), gaussian(0.0, sigma));
    cfg.integration.monitor_interval = 1.0;
    let nu_axis = stirap_nu_axis();
    methods
        .iter()
        .map(|&m| {
            let mut c = with_method(&cfg, m);
            let values = if m == Method::SecondOrder {
                nu_axis.iter().cloned().filter(|&v| v >= 1.0).collect()
            } else {
                nu_axis.clone()
            };
            c.sweep = vec![axis("noise.nu", values)];
            Curve {
                name: format!("{tag}_{}", method_name(m)),
                config: c,
            }
        })
        .collect()
}

fn stirap_heatmap(h1: H1Id, second: SweepAxis, horizon: f64) -> Curve {
    let mut s = scheme(SchemeId::Stirap, horizon);
    s.h1 = h1;
    let mut cfg = base(s, gaussian(0.0, 2.0));
    cfg.integration.monitor_interval = 1.0;
    cfg.sweep = vec![axis("noise.nu", logspace(1e-3, 1e2, 16)), second];
    Curve {
        name: "surface".into(),
        config: cfg,
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Exact => "exact",
        Method::Weak => "weak",
        Method::Naive => "naive",
        Method::SecondOrder => "second_order",
        Method::StrongLimit => "strong_limit",
    }
}

/// Curves of a figure preset.
pub fn preset(id: &str) -> Option<Vec<Curve>> {
    use Method::*;
    let curves = match id {
        "fig1a" => phase_curves(&[(0.0, 1e-4), (0.01, 1e-4), (0.1, 1e-4), (1.0, 1e-4)], "j"),
        "fig1b" => phase_curves(&[(0.0, 0.0), (0.0, 0.01), (0.0, 0.05), (0.0, 0.1)], "d"),
        "fig2a" => [3.5, 1.0]
            .iter()
            .flat_map(|&d0| rap_d_sweep(d0, H1Id::SameAsH0, &[Exact, Weak, Naive, SecondOrder]))
            .collect(),
        "fig2b" => {
            let mut cfg = base(
                scheme(SchemeId::Rap, 20.0),
                NoiseSection::TwoLevel { j: 0.0, d: 0.0 },
            );
            cfg.integration.monitor_interval = 1.0;
            cfg.sweep = vec![
                axis("noise.d", rap_d_axis()),
                axis("scheme.horizon", linspace(2.0, 40.0, 20)),
            ];
            vec![Curve {
                name: "surface".into(),
                config: cfg,
            }]
        }
        "fig3a" | "fig3b" => {
            let h1 = if id == "fig3a" {
                H1Id::FrequencyError
            } else {
                H1Id::TimingFrequency
            };
            [3.5, 1.0, 0.5]
                .iter()
                .flat_map(|&d0| rap_d_sweep(d0, h1, &[Exact, Weak]))
                .collect()
        }
        "fig4" => {
            let mut cfg = base(scheme(SchemeId::Stirap, 1.0), gaussian(0.0, 1.0));
            cfg.integration.monitor_interval = 1e-3;
            cfg.outputs = OutputsSection {
                observables: vec![Observable::Controls],
            };
            vec![Curve {
                name: "pulses".into(),
                config: cfg,
            }]
        }
        "fig5a" => [100.0, 200.0, 300.0]
            .iter()
            .flat_map(|&t| stirap_nu_sweep(t, 2.0, &[Exact, Weak, SecondOrder], &format!("T_{t}")))
            .collect(),
        "fig5b" => [1.0, 2.0, 3.0]
            .iter()
            .flat_map(|&s| {
                stirap_nu_sweep(200.0, s, &[Exact, Weak, SecondOrder], &format!("sigma_{s}"))
            })
            .collect(),
        "fig6a" => vec![stirap_heatmap(
            H1Id::SameAsH0,
            axis("scheme.horizon", linspace(20.0, 300.0, 15)),
            200.0,
        )],
        "fig6b" => vec![stirap_heatmap(
            H1Id::SameAsH0,
            axis("noise.distribution.sigma", linspace(0.25, 4.0, 16)),
            200.0,
        )],
        "fig6c" => vec![stirap_heatmap(
            H1Id::PhaseFluctuation,
            axis("scheme.horizon", linspace(20.0, 300.0, 15)),
            200.0,
        )],
        _ => return None,
    };
    Some(curves)
}

/// Runs a preset and writes `<id>_<curve>.csv` files into `out`.
pub fn reproduce(id: &str, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let curves = preset(id).ok_or_else(|| {
        crate::config::ConfigError::new(
            "figure",
            format!(
                "unknown figure id {id}; expected one of {}",
                FIGURES.join(", ")
            ),
        )
    })?;
    std::fs::create_dir_all(out)
        .map_err(|e| RunError::Numerical(format!("{}: {e}", out.display())))?;
    let mut written = Vec::new();
    for curve in curves {
        for (obs, mut table) in run_config(&curve.config)? {
            table.metadata.notes.push(("figure".into(), id.into()));
            table
                .metadata
                .notes
                .push(("curve".into(), curve.name.clone()));
            let suffix = if curve.config.outputs.observables.len() > 1 {
                format!("_{}", obs.name())
            } else {
                String::new()
            };
            let path = out.join(format!("{id}_{}{suffix}.csv", curve.name));
            table
                .write(&path)
                .map_err(|e| RunError::Numerical(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
    }
    Ok(written)
}
