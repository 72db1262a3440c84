//! Stochastic oracle: unitary evolution interrupted by Poisson-timed kicks
//! `exp(-iξH₁(t_i))`, averaged over realisations.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{sample_strikes, strike_stream, NoiseModel, Strike};
use crate::propagate::{propagators, IntegrationConfig, PropagationRecord};
use crate::qcore::{
    eigendecompose, frobenius, unitary_kick, CMatrix, DensityMatrix, HermitianOperator,
    TimeDependentOperator, C64,
};

/// Largest step of the fine propagator grid used by ensembles.
const FINE_STEP: f64 = 0.05;
/// Trajectories summed together before the pairwise reduction.
const CHUNK: usize = 32;
/// Ensemble and master-equation states closer than this agree to within the
/// accuracy of the deterministic integrators.
pub const NUMERICAL_FLOOR: f64 = 1e-7;

/// States of a single realisation on the monitor grid.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

/// Columns `W` with `ρ = WW†`, so pure and mixed starts evolve alike.
fn factor(rho: &DensityMatrix) -> CMatrix {
    let eig = eigendecompose(&HermitianOperator::new_unchecked(rho.matrix().clone()));
    let keep: Vec<usize> = (0..eig.dim()).filter(|&k| eig.values[k] > 1e-14).collect();
    let mut w = CMatrix::zeros(rho.dim(), keep.len());
    for (col, &k) in keep.iter().enumerate() {
        w.set_column(col, &(eig.vector(k) * C64::new(eig.values[k].sqrt(), 0.0)));
    }
    w
}

fn check_strikes(strikes: &[Strike], horizon: f64) -> Result<()> {
    if strikes.windows(2).any(|w| w[1].time < w[0].time) {
        return Err(Error::InvalidParameter(
            "strike times must be sorted".into(),
        ));
    }
    if strikes.iter().any(|s| !(s.time > 0.0 && s.time < horizon)) {
        return Err(Error::InvalidParameter(
            "strike times must lie inside (0, T)".into(),
        ));
    }
    Ok(())
}

/// One realisation: `H₀` evolution between strikes and `exp(-iξH₁(t_i))` at
/// each strike, recorded on the monitor grid of `cfg`. A strike coinciding
/// with a monitor time is applied after recording.
pub fn run_trajectory(
    h0: &TimeDependentOperator,
    h1: &TimeDependentOperator,
    strikes: &[Strike],
    rho0: &DensityMatrix,
    horizon: f64,
    cfg: &IntegrationConfig,
) -> Result<TrajectoryRecord> {
    check_strikes(strikes, horizon)?;
    let grid = cfg.grid(0.0, horizon);
    let mut w = factor(rho0);
    let mut t = 0.0;
    let mut next = 0;
    let mut states = Vec::with_capacity(grid.len());
    for &out in &grid {
        while next < strikes.len() && strikes[next].time <= out {
            let s = strikes[next];
            if s.time > t {
                w = propagators(h0, t, &[s.time], cfg)?.pop().unwrap() * w;
                t = s.time;
            }
            w = unitary_kick(&h1.evaluate(s.time), s.strength) * w;
            next += 1;
        }
        if out > t {
            w = propagators(h0, t, &[out], cfg)?.pop().unwrap() * w;
            t = out;
        }
        states.push(DensityMatrix::new_unchecked(&w * w.adjoint()));
    }
    Ok(TrajectoryRecord {
        times: grid,
        states,
    })
}

/// Fourth-order Magnus step `U(b, a)`.
fn magnus_step(h0: &TimeDependentOperator, a: f64, b: f64) -> CMatrix {
    let h = b - a;
    if h == 0.0 {
        return CMatrix::identity(h0.dim(), h0.dim());
    }
    let s = 3f64.sqrt() / 6.0;
    let m1 = h0.matrix_at(a + h * (0.5 - s)) * C64::new(0.0, -1.0);
    let m2 = h0.matrix_at(a + h * (0.5 + s)) * C64::new(0.0, -1.0);
    let omega = (&m1 + &m2) * C64::new(0.5 * h, 0.0)
        + (&m2 * &m1 - &m1 * &m2) * C64::new(3f64.sqrt() / 12.0 * h * h, 0.0);
    omega.exp()
}

/// Sample mean and spread of an ensemble on the monitor grid.
#[derive(Clone, Debug)]
pub struct TrajectoryEnsemble {
    pub n_traj: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub mean_states: Vec<DensityMatrix>,
    /// `sqrt(Σ_ab var(ρ_ab) / n)`.
    pub std_errors: Vec<f64>,
    /// Standard error of each matrix element.
    pub elementwise_std_errors: Vec<nalgebra::DMatrix<f64>>,
}

#[derive(Clone)]
struct Sums {
    first: Vec<CMatrix>,
    second: Vec<nalgebra::DMatrix<f64>>,
}

impl Sums {
    fn zeros(points: usize, d: usize) -> Self {
        Self {
            first: vec![CMatrix::zeros(d, d); points],
            second: vec![nalgebra::DMatrix::zeros(d, d); points],
        }
    }

    fn add(&mut self, k: usize, rho: &CMatrix) {
        self.first[k] += rho;
        self.second[k] += rho.map(|z| z.norm_sqr());
    }

    fn merge(mut self, other: &Self) -> Self {
        for k in 0..self.first.len() {
            self.first[k] += &other.first[k];
            self.second[k] += &other.second[k];
        }
        self
    }
}

fn pairwise(mut parts: Vec<Sums>) -> Sums {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(&b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().unwrap()
}

/// Averages `n_traj` realisations. Trajectory `i` draws its strikes from
/// stream `i` of `seed`, so results do not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn average_ensemble(
    h0: &TimeDependentOperator,
    h1: &TimeDependentOperator,
    model: &NoiseModel,
    rho0: &DensityMatrix,
    horizon: f64,
    n_traj: usize,
    seed: u64,
    cfg: &IntegrationConfig,
) -> Result<TrajectoryEnsemble> {
    if n_traj < 2 {
        return Err(Error::InvalidParameter(
            "an ensemble needs at least two trajectories".into(),
        ));
    }
    let grid = cfg.grid(0.0, horizon);
    let d = h0.dim();
    // refine each monitor interval into equal fine steps
    let mut fine = vec![0.0];
    let mut output_index = vec![0];
    for win in grid.windows(2) {
        let m = ((win[1] - win[0]) / FINE_STEP).ceil().max(1.0) as usize;
        for s in 1..=m {
            fine.push(if s == m {
                win[1]
            } else {
                win[0] + (win[1] - win[0]) * s as f64 / m as f64
            });
        }
        output_index.push(fine.len() - 1);
    }
    let cumulative = propagators(h0, 0.0, &fine[1..], cfg)?;
    let mut steps = Vec::with_capacity(fine.len() - 1);
    let mut prev = CMatrix::identity(d, d);
    for u in &cumulative {
        steps.push(u * prev.adjoint());
        prev = u.clone();
    }
    let w0 = factor(rho0);
    let is_output: Vec<Option<usize>> = {
        let mut v = vec![None; fine.len()];
        for (k, &j) in output_index.iter().enumerate() {
            v[j] = Some(k);
        }
        v
    };

    let run = |index: usize, sums: &mut Sums| -> Result<()> {
        let mut rng = strike_stream(seed, index as u64);
        let strikes = sample_strikes(model, horizon, &mut rng)?;
        let mut w = w0.clone();
        let mut next = 0;
        sums.add(0, &(&w * w.adjoint()));
        for j in 0..steps.len() {
            let (a, b) = (fine[j], fine[j + 1]);
            if next < strikes.len() && strikes[next].time <= b {
                let mut t = a;
                while next < strikes.len() && strikes[next].time <= b {
                    let s = strikes[next];
                    w = magnus_step(h0, t, s.time) * w;
                    w = unitary_kick(&h1.evaluate(s.time), s.strength) * w;
                    t = s.time;
                    next += 1;
                }
                w = magnus_step(h0, t, b) * w;
            } else {
                w = &steps[j] * w;
            }
            if let Some(k) = is_output[j + 1] {
                sums.add(k, &(&w * w.adjoint()));
            }
        }
        Ok(())
    };

    let chunks: Vec<(usize, usize)> = (0..n_traj)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(n_traj)))
        .collect();
    let parts = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut sums = Sums::zeros(grid.len(), d);
            for i in start..end {
                run(i, &mut sums)?;
            }
            Ok(sums)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = pairwise(parts);

    let n = n_traj as f64;
    let mut mean_states = Vec::with_capacity(grid.len());
    let mut std_errors = Vec::with_capacity(grid.len());
    let mut elementwise = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let mean = &total.first[k] / C64::new(n, 0.0);
        let var = nalgebra::DMatrix::from_fn(d, d, |a, b| {
            ((total.second[k][(a, b)] - n * mean[(a, b)].norm_sqr()) / (n - 1.0)).max(0.0)
        });
        std_errors.push((var.sum() / n).sqrt());
        elementwise.push(var.map(|v| (v / n).sqrt()));
        mean_states.push(DensityMatrix::new_unchecked(mean));
    }
    Ok(TrajectoryEnsemble {
        n_traj,
        seed,
        times: grid,
        mean_states,
        std_errors,
        elementwise_std_errors: elementwise,
    })
}

/// Agreement between an ensemble and a master-equation record.
#[derive(Clone, Debug)]
pub struct Comparison {
    /// `‖mean_k - ρ_k‖_F / se_k` per monitor time.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// Fraction of times with deviation ≤ 3.
    pub fraction_within: f64,
    /// Fraction of matrix elements (over all times) within three standard errors.
    pub elementwise_fraction: f64,
    pub passed: bool,
}

/// Passes when the deviation is at most 3 on at least 99% of the times.
/// Differences below [`NUMERICAL_FLOOR`] count as agreement regardless of the spread.
pub fn compare_to_master(
    ensemble: &TrajectoryEnsemble,
    record: &PropagationRecord,
) -> Result<Comparison> {
    if ensemble.times.len() != record.times.len()
        || ensemble
            .times
            .iter()
            .zip(&record.times)
            .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::GridMismatch(format!(
            "{} ensemble times vs {} record times",
            ensemble.times.len(),
            record.times.len()
        )));
    }
    let mut deviations = Vec::with_capacity(ensemble.times.len());
    let mut elements_within = 0usize;
    let mut elements = 0usize;
    for k in 0..ensemble.times.len() {
        let diff = ensemble.mean_states[k].matrix() - record.states[k].matrix();
        let norm = frobenius(&diff);
        let se = ensemble.std_errors[k];
        deviations.push(if norm < NUMERICAL_FLOOR {
            0.0
        } else if se > 0.0 {
            norm / se
        } else {
            f64::INFINITY
        });
        for (z, s) in diff.iter().zip(ensemble.elementwise_std_errors[k].iter()) {
            elements += 1;
            if z.norm() <= 3.0 * s || z.norm() < NUMERICAL_FLOOR {
                elements_within += 1;
            }
        }
    }
    let within = deviations.iter().filter(|&&v| v <= 3.0).count();
    let fraction_within = within as f64 / deviations.len() as f64;
    Ok(Comparison {
        max_deviation: deviations.iter().cloned().fold(0.0, f64::max),
        fraction_within,
        elementwise_fraction: elements_within as f64 / elements as f64,
        passed: fraction_within >= 0.99,
        deviations,
    })
}
