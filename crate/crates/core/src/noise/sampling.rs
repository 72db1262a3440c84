use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{NoiseModel, StrikeDistribution};
use crate::error::{Error, Result};

/// One delta kick: arrival time and strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strike {
    pub time: f64,
    pub strength: f64,
}

/// Independent random stream for trajectory `index` under a global `seed`.
pub fn strike_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample_strength<R: Rng + ?Sized>(dist: &StrikeDistribution, rng: &mut R) -> Result<f64> {
    match dist {
        StrikeDistribution::Laplace { scale } => {
            let u: f64 = rng.random::<f64>() - 0.5;
            Ok(-scale * u.signum() * (1.0 - 2.0 * u.abs()).ln())
        }
        StrikeDistribution::Gaussian { mean, sigma } => {
            let normal =
                Normal::new(*mean, *sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(normal.sample(rng))
        }
        StrikeDistribution::PointMass { value } => Ok(*value),
        StrikeDistribution::Custom(_) => Err(Error::Unsupported(
            "custom distributions cannot be sampled".into(),
        )),
    }
}

/// Draws a strike train on `(0, horizon)`: a Poisson(νT) count, uniform
/// times returned in increasing order, and i.i.d. strengths.
pub fn sample_strikes<R: Rng + ?Sized>(
    model: &NoiseModel,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<Strike>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if matches!(model.distribution(), StrikeDistribution::Custom(_)) {
        return Err(Error::Unsupported(
            "custom distributions cannot be sampled".into(),
        ));
    }
    let mean = model.nu() * horizon;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let count = poisson.sample(rng) as usize;
    let mut times: Vec<f64> = (0..count)
        .map(|_| loop {
            let t = rng.random::<f64>() * horizon;
            if t > 0.0 {
                break t;
            }
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times
        .into_iter()
        .map(|time| {
            Ok(Strike {
                time,
                strength: sample_strength(model.distribution(), rng)?,
            })
        })
        .collect()
}
