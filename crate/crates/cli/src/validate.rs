//! Monte-Carlo validation of the master equation.

use shotnoise::propagate::integrate_master;
use shotnoise::trajectories::{average_ensemble, compare_to_master, Comparison};

use crate::config::{ConfigError, ExperimentConfig};
use crate::runner::{RunError, VERSION};
use crate::table::{Metadata, ResultTable};

/// Outcome of a validation run; `table` holds per-time deviations.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub comparison: Comparison,
    pub table: ResultTable,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.comparison.passed
    }
}

/// Compares an ensemble of `n_traj` stochastic realisations against the
/// master-equation solution of `cfg` on its monitor grid.
pub fn validate(
    cfg: &ExperimentConfig,
    n_traj: usize,
    seed: u64,
) -> Result<ValidationReport, RunError> {
    cfg.validate()?;
    if !cfg.sweep.is_empty() {
        return Err(ConfigError::new("sweep", "validation runs a single configuration").into());
    }
    let Some(model) = cfg.noise_model()? else {
        return Err(ConfigError::new(
            "noise.model",
            "validation needs poisson noise with a strike distribution",
        )
        .into());
    };
    if n_traj < 2 {
        return Err(ConfigError::new("traj", "need at least two trajectories").into());
    }
    let scheme = cfg.scheme_config().build()?;
    let p = &scheme.protocol;
    let rho0 = p.initial_density()?;
    let icfg = cfg.integration_config();
    let record = integrate_master(p.h0(), &scheme.h1, &model, &rho0, p.horizon(), &icfg)?;
    let ensemble = average_ensemble(
        p.h0(),
        &scheme.h1,
        &model,
        &rho0,
        p.horizon(),
        n_traj,
        seed,
        &icfg,
    )?;
    let comparison = compare_to_master(&ensemble, &record)?;

    let mut resolved = cfg.resolved()?;
    resolved.seed = seed;
    let metadata = Metadata {
        version: VERSION.to_string(),
        seed,
        config: resolved.to_toml(),
        notes: vec![
            ("n_traj".into(), n_traj.to_string()),
            ("passed".into(), comparison.passed.to_string()),
            (
                "fraction_within".into(),
                format!("{:.6}", comparison.fraction_within),
            ),
            (
                "max_deviation".into(),
                format!("{:.6e}", comparison.max_deviation),
            ),
            (
                "elementwise_fraction".into(),
                format!("{:.6}", comparison.elementwise_fraction),
            ),
        ],
    };
    let mut table = ResultTable::new(
        vec![
            "t".into(),
            "deviation".into(),
            "std_error".into(),
            "distance".into(),
        ],
        metadata,
    );
    for k in 0..ensemble.times.len() {
        let distance = (ensemble.mean_states[k].matrix() - record.states[k].matrix()).norm();
        table.push(vec![
            ensemble.times[k],
            comparison.deviations[k],
            ensemble.std_errors[k],
            distance,
        ]);
    }
    Ok(ValidationReport { comparison, table })
}
