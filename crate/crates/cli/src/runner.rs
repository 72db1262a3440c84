//! Evaluation of experiment configurations into result tables.

use rayon::prelude::*;
use shotnoise::approx::{
    naive_strong_noise, noise_sensitivity, strong_noise_limit, strong_noise_second_order,
    FidelityCurve,
};
use shotnoise::liouvillian::BasisPath;
use shotnoise::propagate::{propagate, MasterEquation, PropagationRecord};
use shotnoise::qcore::DensityMatrix;
use shotnoise::schemes::Scheme;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Method, Observable};
use crate::table::{Metadata, ResultTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Frame nodes used by the strong-noise approximations.
const STRONG_FRAME_POINTS: usize = 4001;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<shotnoise::Error> for RunError {
    fn from(e: shotnoise::Error) -> Self {
        Self::Numerical(e.to_string())
    }
}

/// Values of one configuration on its output times.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// Present for methods that produce density matrices.
    pub states: Option<Vec<DensityMatrix>>,
    /// Conservation diagnostics of the underlying integration, if any.
    pub record: Option<PropagationRecord>,
}

fn integrate(cfg: &ExperimentConfig, scheme: &Scheme) -> Result<PropagationRecord, RunError> {
    let p = &scheme.protocol;
    let rho0 = p.initial_density()?;
    let noise = cfg.noise_term()?;
    let icfg = cfg.integration_config();
    let record = match cfg.method {
        Method::Naive => naive_strong_noise(p.h0(), &scheme.h1, &noise, &rho0, p.horizon(), &icfg)?,
        _ => {
            let eq = MasterEquation::new(p.h0().clone(), scheme.h1.clone(), noise)?;
            propagate(&eq, &rho0, p.horizon(), &icfg)?
        }
    };
    if let Some(b) = record.failure {
        return Err(RunError::Numerical(format!(
            "{:?} bound breached at t = {} (value {:.3e}); trace error {:.3e}, hermiticity error {:.3e}, min eigenvalue {:.3e}",
            b.kind,
            b.time,
            b.value,
            record.max_trace_error(),
            record.max_hermiticity_error(),
            record.min_eigenvalue()
        )));
    }
    Ok(record)
}

/// Evaluates a configuration without sweeps.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Evaluation, RunError> {
    cfg.validate()?;
    let scheme = cfg.scheme_config().build()?;
    let p = &scheme.protocol;
    let horizon = p.horizon();
    let final_only = |f: f64| Evaluation {
        times: vec![horizon],
        fidelity: vec![f],
        states: None,
        record: None,
    };
    if cfg.outputs.observables == [Observable::Controls] {
        let times = cfg.integration_config().grid(0.0, horizon);
        return Ok(Evaluation {
            fidelity: vec![f64::NAN; times.len()],
            times,
            states: None,
            record: None,
        });
    }
    match cfg.method {
        Method::Exact | Method::Naive => {
            let record = integrate(cfg, &scheme)?;
            let curve = FidelityCurve::along(p, &record)?;
            Ok(Evaluation {
                times: record.times.clone(),
                fidelity: curve.values,
                states: Some(record.states.clone()),
                record: Some(record),
            })
        }
        Method::Weak => {
            let s = noise_sensitivity(
                p.h0(),
                &scheme.h1,
                &cfg.noise_term()?,
                &p.initial_density()?,
                &p.target_state()?,
                horizon,
                &cfg.integration_config(),
            )?;
            Ok(final_only(s.f0 + s.slope))
        }
        Method::SecondOrder => {
            let path = BasisPath::new(scheme.h1.clone(), horizon, STRONG_FRAME_POINTS)?;
            let so = strong_noise_second_order(
                &path,
                &cfg.noise_term()?,
                p.h0(),
                &p.initial_density()?,
                &p.target_state()?,
                horizon,
                cfg.integration.strong_intervals,
            )?;
            Ok(final_only(so.fidelity))
        }
        Method::StrongLimit => {
            let path = BasisPath::new(scheme.h1.clone(), horizon, STRONG_FRAME_POINTS)?;
            let lim = strong_noise_limit(
                &path,
                &cfg.noise_term()?,
                &p.initial_density()?,
                &p.target_state()?,
            )?;
            Ok(final_only(lim.fidelity))
        }
    }
}

fn columns(observable: Observable, dim: usize, scheme: &Scheme) -> Vec<String> {
    match observable {
        Observable::Fidelity => vec!["fidelity".into()],
        Observable::Purity => vec!["purity".into()],
        Observable::Populations => (0..dim).map(|k| format!("p{k}")).collect(),
        Observable::Coherences => {
            let mut out = Vec::new();
            for i in 0..dim {
                for j in i + 1..dim {
                    out.push(format!("re_rho{i}{j}"));
                    out.push(format!("im_rho{i}{j}"));
                }
            }
            out
        }
        Observable::Controls => {
            if scheme.protocol.dim() == 2 {
                vec!["omega_r".into(), "omega_i".into(), "delta".into()]
            } else {
                vec!["omega_12".into(), "omega_23".into()]
            }
        }
    }
}

fn values(observable: Observable, eval: &Evaluation, k: usize, scheme: &Scheme) -> Vec<f64> {
    let state = || {
        eval.states.as_ref().expect("method provides states")[k]
            .matrix()
            .clone()
    };
    match observable {
        Observable::Fidelity => vec![eval.fidelity[k]],
        Observable::Purity => {
            let rho = state();
            vec![(&rho * &rho).trace().re]
        }
        Observable::Populations => {
            let rho = state();
            (0..rho.nrows()).map(|i| rho[(i, i)].re).collect()
        }
        Observable::Coherences => {
            let rho = state();
            let mut out = Vec::new();
            for i in 0..rho.nrows() {
                for j in i + 1..rho.nrows() {
                    out.push(rho[(i, j)].re);
                    out.push(rho[(i, j)].im);
                }
            }
            out
        }
        Observable::Controls => {
            let h = scheme.protocol.h0().matrix_at(eval.times[k]);
            if h.nrows() == 2 {
                vec![2.0 * h[(1, 0)].re, 2.0 * h[(1, 0)].im, 2.0 * h[(1, 1)].re]
            } else {
                vec![2.0 * h[(0, 1)].re, 2.0 * h[(1, 2)].re]
            }
        }
    }
}

/// Runs a configuration, producing one table per requested observable.
/// Without a sweep the rows are output times; with a sweep they are grid
/// points evaluated at the final time.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Vec<(Observable, ResultTable)>, RunError> {
    cfg.validate()?;
    let resolved = cfg.resolved()?;
    let metadata = Metadata {
        version: VERSION.to_string(),
        seed: resolved.seed,
        config: resolved.to_toml(),
        notes: Vec::new(),
    };
    let points = resolved.sweep_points()?;
    let configs: Vec<ExperimentConfig> = points
        .iter()
        .map(|p| {
            let mut c = resolved.clone();
            c.sweep.clear();
            for (axis, &v) in resolved.sweep.iter().zip(p) {
                c.set(&axis.parameter, v)?;
            }
            Ok(c)
        })
        .collect::<Result<_, ConfigError>>()?;
    let evaluations: Vec<(Scheme, Evaluation)> = configs
        .par_iter()
        .map(|c| Ok((c.scheme_config().build()?, evaluate(c)?)))
        .collect::<Result<_, RunError>>()?;

    let dim = evaluations[0].0.protocol.dim();
    let mut tables = Vec::new();
    for &obs in &resolved.outputs.observables {
        let cols = columns(obs, dim, &evaluations[0].0);
        let mut header: Vec<String> = if resolved.sweep.is_empty() {
            vec!["t".into()]
        } else {
            resolved.sweep.iter().map(|a| a.parameter.clone()).collect()
        };
        header.extend(cols);
        let mut table = ResultTable::new(header, metadata.clone());
        for (point, (scheme, eval)) in points.iter().zip(&evaluations) {
            if resolved.sweep.is_empty() {
                for k in 0..eval.times.len() {
                    let mut row = vec![eval.times[k]];
                    row.extend(values(obs, eval, k, scheme));
                    table.push(row);
                }
            } else {
                let mut row = point.clone();
                row.extend(values(obs, eval, eval.times.len() - 1, scheme));
                table.push(row);
            }
        }
        tables.push((obs, table));
    }
    Ok(tables)
}
