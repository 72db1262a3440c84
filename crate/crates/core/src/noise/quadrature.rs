//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64, &mut [f64])>(
    f: &mut F,
    a: f64,
    b: f64,
    n: usize,
    buf: &mut [f64],
) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k = vec![0.0; n];
    let mut g = vec![0.0; n];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in nodes {
            f(center + sign * half * x, buf);
            for c in 0..n {
                k[c] += w * buf[c];
                if i % 2 == 1 {
                    g[c] += WG[i / 2] * buf[c];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for c in 0..n {
        k[c] *= half;
        g[c] *= half;
        error = error.max((k[c] - g[c]).abs());
    }
    Segment {
        a,
        b,
        value: k,
        error,
    }
}

/// Integrates the `n`-component function `f` over `[a, b]` until the summed
/// error estimate (max over components) drops below `abs_tol`.
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    abs_tol: f64,
    max_segments: usize,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut buf = vec![0.0; n];
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b, n, &mut buf);
    let mut total_error = first.error;
    heap.push(first);
    while total_error > abs_tol {
        if heap.len() >= max_segments {
            return Err(Error::QuadratureFailure(format!(
                "error estimate {total_error:.3e} above tolerance {abs_tol:.1e} after {max_segments} segments"
            )));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure(format!(
                "segment collapsed at {mid}"
            )));
        }
        let left = kronrod(&mut f, worst.a, mid, n, &mut buf);
        let right = kronrod(&mut f, mid, worst.b, n, &mut buf);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let mut sum = vec![0.0; n];
    for seg in heap.iter() {
        for (s, v) in sum.iter_mut().zip(&seg.value) {
            *s += v;
        }
    }
    Ok(sum)
}

/// Integrates over the whole real line via `x = center + scale·u/(1-u²)`,
/// splitting at `u = 0`.
pub fn integrate_real_line<F>(
    mut f: F,
    center: f64,
    scale: f64,
    n: usize,
    abs_tol: f64,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut mapped = |u: f64, out: &mut [f64]| {
        let d = 1.0 - u * u;
        let x = center + scale * u / d;
        let jac = scale * (1.0 + u * u) / (d * d);
        f(x, out);
        for v in out.iter_mut() {
            *v = if *v == 0.0 { 0.0 } else { *v * jac };
        }
    };
    let left = integrate(&mut mapped, -1.0, 0.0, n, 0.5 * abs_tol, 4000)?;
    let right = integrate(&mut mapped, 0.0, 1.0, n, 0.5 * abs_tol, 4000)?;
    Ok(left.iter().zip(&right).map(|(l, r)| l + r).collect())
}
