//! Dormand–Prince 5(4) with adaptive steps on complex state vectors.

use crate::error::{Error, Result};
use crate::qcore::C64;

use super::IntegrationConfig;

const MAX_STEPS: usize = 50_000_000;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side `ẏ = f(t, y)`.
pub trait OdeSystem {
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()>;
}

/// Step counters of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

struct Workspace {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    ynew: Vec<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]),
            tmp: vec![C64::new(0.0, 0.0); n],
            ynew: vec![C64::new(0.0, 0.0); n],
        }
    }
}

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..y.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (a, k) in terms {
            acc += k[i] * *a;
        }
        out[i] = y[i] + acc * h;
    }
}

fn error_norm(y: &[C64], ynew: &[C64], err: &[C64], cfg: &IntegrationConfig) -> f64 {
    let mut sum = 0.0;
    for i in 0..y.len() {
        let scale = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(ynew[i].norm());
        sum += (err[i].norm() / scale).powi(2);
    }
    (sum / y.len() as f64).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn initial_step<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    y: &[C64],
    f0: &[C64],
    dir: f64,
    cfg: &IntegrationConfig,
    ws: &mut Workspace,
    stats: &mut OdeStats,
) -> Result<f64> {
    let n = y.len() as f64;
    let rms = |v: &mut dyn Iterator<Item = (f64, &C64)>| {
        (v.map(|(x, yi)| (x / (cfg.abs_tol + cfg.rel_tol * yi.norm())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = rms(&mut y.iter().map(|v| (v.norm(), v)));
    let d1 = rms(&mut f0.iter().zip(y).map(|(f, yi)| (f.norm(), yi)));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(cfg.max_step);
    combine(&mut ws.tmp, y, dir * h0, &[(1.0, f0)]);
    sys.rhs(t + dir * h0, &ws.tmp, &mut ws.ynew)?;
    stats.evaluations += 1;
    let d2 = rms(&mut ws
        .ynew
        .iter()
        .zip(f0)
        .zip(y)
        .map(|((a, b), yi)| ((a - b).norm(), yi)))
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(cfg.max_step))
}

/// Integrates from `t0` through each time in `outputs` (monotone in one
/// direction, possibly backwards), calling `observe(index, t, y)` on arrival.
/// The observer may modify `y` in place.
pub fn solve<S, O>(
    sys: &mut S,
    t0: f64,
    y0: &[C64],
    outputs: &[f64],
    cfg: &IntegrationConfig,
    mut observe: O,
) -> Result<OdeStats>
where
    S: OdeSystem,
    O: FnMut(usize, f64, &mut [C64]) -> Result<()>,
{
    cfg.validate()?;
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let Some(&last) = outputs.last() else {
        return Ok(stats);
    };
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    if outputs.iter().any(|&s| (s - t0) * dir < 0.0)
        || outputs.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0)
    {
        return Err(Error::InvalidParameter(
            "output times must be monotone away from the start".into(),
        ));
    }
    let mut ws = Workspace::new(n);
    let mut f = vec![C64::new(0.0, 0.0); n];
    sys.rhs(t, &y, &mut f)?;
    stats.evaluations += 1;
    let mut h = if cfg.initial_step > 0.0 {
        cfg.initial_step.min(cfg.max_step)
    } else {
        initial_step(sys, t, &y, &f, dir, cfg, &mut ws, &mut stats)?
    };

    for (idx, &target) in outputs.iter().enumerate() {
        while (target - t) * dir > 0.0 {
            if stats.accepted + stats.rejected >= MAX_STEPS {
                return Err(Error::StepSizeUnderflow { time: t, step: h });
            }
            let remaining = (target - t).abs();
            let mut step = h.min(cfg.max_step);
            let landing = step >= remaining * (1.0 - 1e-12);
            if landing {
                step = remaining;
            }
            let min_step = 1e-14 * t.abs().max(1.0);
            if step < min_step && !landing {
                return Err(Error::StepSizeUnderflow { time: t, step });
            }
            let hs = dir * step;
            let ws_k = &mut ws.k;
            ws_k[0].copy_from_slice(&f);
            let (k1, rest) = ws_k.split_at_mut(1);
            let (k2, rest) = rest.split_at_mut(1);
            let (k3, rest) = rest.split_at_mut(1);
            let (k4, rest) = rest.split_at_mut(1);
            let (k5, rest) = rest.split_at_mut(1);
            let (k6, k7) = rest.split_at_mut(1);
            let (k1, k2, k3, k4, k5, k6, k7) = (
                &k1[0], &mut k2[0], &mut k3[0], &mut k4[0], &mut k5[0], &mut k6[0], &mut k7[0],
            );

            combine(&mut ws.tmp, &y, hs, &[(A21, k1)]);
            sys.rhs(t + C2 * hs, &ws.tmp, k2)?;
            combine(&mut ws.tmp, &y, hs, &[(A31, k1), (A32, k2)]);
            sys.rhs(t + C3 * hs, &ws.tmp, k3)?;
            combine(&mut ws.tmp, &y, hs, &[(A41, k1), (A42, k2), (A43, k3)]);
            sys.rhs(t + C4 * hs, &ws.tmp, k4)?;
            combine(
                &mut ws.tmp,
                &y,
                hs,
                &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)],
            );
            sys.rhs(t + C5 * hs, &ws.tmp, k5)?;
            combine(
                &mut ws.tmp,
                &y,
                hs,
                &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            );
            sys.rhs(t + hs, &ws.tmp, k6)?;
            combine(
                &mut ws.ynew,
                &y,
                hs,
                &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
            );
            let t_new = if landing { target } else { t + hs };
            sys.rhs(t_new, &ws.ynew, k7)?;
            stats.evaluations += 6;

            for i in 0..n {
                ws.tmp[i] =
                    (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                        * hs;
            }
            let err = error_norm(&y, &ws.ynew, &ws.tmp, cfg);
            if !err.is_finite() {
                stats.rejected += 1;
                h = step * 0.2;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                stats.accepted += 1;
                t = t_new;
                y.copy_from_slice(&ws.ynew);
                f.copy_from_slice(k7);
                // a landing step may be short; do not let it shrink h
                h = if landing {
                    h.max(step * factor)
                } else {
                    step * factor
                };
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        let before = y.clone();
        observe(idx, t, &mut y)?;
        if y != before {
            sys.rhs(t, &y, &mut f)?;
            stats.evaluations += 1;
        }
    }
    Ok(stats)
}
