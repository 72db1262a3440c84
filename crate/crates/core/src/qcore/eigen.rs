use super::{CMatrix, CVector, HermitianOperator, TimeDependentOperator, C64};
use crate::error::{Error, Result};

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Minimum separation between the best and second-best overlap for a label
/// continuation to be unambiguous.
const CROSSING_MARGIN: f64 = 0.1;

/// Eigenvalues with their unit eigenvectors stored as matrix columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, n: usize) -> CVector {
        self.vectors.column(n).into_owned()
    }

    /// `Σ E_n |φ_n⟩⟨φ_n|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let diag = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        &self.vectors * diag * self.vectors.adjoint()
    }

    pub fn is_degenerate(&self) -> bool {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.windows(2).any(|w| w[1] - w[0] < DEGENERACY_GAP)
    }
}

/// Rotates `v` so its largest-magnitude component is real and positive.
fn fix_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    *v *= phase;
}

/// Eigendecomposition of a Hermitian operator with ascending eigenvalues.
///
/// Each eigenvector is normalised with its largest-magnitude component real
/// and positive, so identical inputs give identical outputs.
pub fn eigendecompose(op: &HermitianOperator) -> EigenSystem {
    let eig = nalgebra::SymmetricEigen::new(op.matrix().clone());
    let n = op.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let mut v: CVector = eig.eigenvectors.column(k).into_owned();
        v /= C64::new(v.norm(), 0.0);
        fix_phase(&mut v);
        vectors.set_column(col, &v);
        values.push(eig.eigenvalues[k]);
    }
    EigenSystem { values, vectors }
}

/// Groups the (ascending) eigenvalues of `raw` into degenerate clusters.
fn clusters(raw: &EigenSystem) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for k in 0..raw.dim() {
        match out.last_mut() {
            Some(last) if raw.values[k] - raw.values[*last.last().unwrap()] < DEGENERACY_GAP => {
                last.push(k)
            }
            _ => out.push(vec![k]),
        }
    }
    out
}

/// Relabels and rephases `raw` to continue `reference`.
///
/// Labels follow maximal overlap; each vector is rotated so its overlap with
/// the reference vector of the same label is real and positive. Inside a
/// degenerate cluster the reference vectors are projected onto the cluster
/// subspace and orthonormalised.
fn align(reference: &EigenSystem, raw: &EigenSystem, time: f64) -> Result<EigenSystem> {
    let n = raw.dim();
    let groups = clusters(raw);
    let projectors: Vec<CMatrix> = groups
        .iter()
        .map(|g| {
            let mut p = CMatrix::zeros(n, n);
            for &k in g {
                let v = raw.vectors.column(k);
                p += v * v.adjoint();
            }
            p
        })
        .collect();
    let refs: Vec<CVector> = (0..n)
        .map(|i| {
            let v = reference.vector(i);
            let norm = v.norm();
            v / C64::new(norm, 0.0)
        })
        .collect();

    let scores: Vec<Vec<f64>> = refs
        .iter()
        .map(|r| projectors.iter().map(|p| (p * r).norm()).collect())
        .collect();

    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..groups.len()).map(move |c| (i, c)))
        .collect();
    pairs.sort_by(|a, b| scores[b.0][b.1].total_cmp(&scores[a.0][a.1]).then(a.cmp(b)));
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    let mut capacity: Vec<usize> = groups.iter().map(Vec::len).collect();
    for (i, c) in pairs {
        if assigned[i].is_none() && capacity[c] > 0 {
            assigned[i] = Some(c);
            capacity[c] -= 1;
        }
    }

    if groups.len() > 1 {
        for i in 0..n {
            let mut s = scores[i].clone();
            s.sort_by(|a, b| b.total_cmp(a));
            let best = s[0];
            let chosen = scores[i][assigned[i].unwrap()];
            if best - s[1] < CROSSING_MARGIN || chosen < best {
                return Err(Error::EigenCrossing { time });
            }
        }
    }

    let mut values = vec![0.0; n];
    let mut vectors = CMatrix::zeros(n, n);
    for (c, group) in groups.iter().enumerate() {
        let labels: Vec<usize> = (0..n).filter(|&i| assigned[i] == Some(c)).collect();
        let mean = group.iter().map(|&k| raw.values[k]).sum::<f64>() / group.len() as f64;
        if group.len() == 1 {
            let i = labels[0];
            let mut v = raw.vector(group[0]);
            let ov = refs[i].dotc(&v);
            if ov.norm() > 0.0 {
                v *= ov.conj() / ov.norm();
            }
            values[i] = raw.values[group[0]];
            vectors.set_column(i, &v);
            continue;
        }
        let mut basis: Vec<CVector> = Vec::with_capacity(labels.len());
        for &i in &labels {
            let mut u = &projectors[c] * &refs[i];
            for b in &basis {
                let proj = b.dotc(&u);
                u -= b * proj;
            }
            let norm = u.norm();
            if norm < 1e-8 {
                // reference carries no weight in the cluster: complete the
                // basis from the raw eigenvectors instead
                u = group
                    .iter()
                    .map(|&k| {
                        let mut w = raw.vector(k);
                        for b in &basis {
                            let proj = b.dotc(&w);
                            w -= b * proj;
                        }
                        w
                    })
                    .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                    .unwrap();
            }
            let norm = u.norm();
            u /= C64::new(norm, 0.0);
            let ov = refs[i].dotc(&u);
            if ov.norm() > 1e-12 {
                u *= ov.conj() / ov.norm();
            }
            basis.push(u.clone());
            values[i] = mean;
            vectors.set_column(i, &u);
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Instantaneous eigenpairs of a time-dependent operator on a grid, with
/// continuous labels and discrete parallel-transport phases.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    times: Vec<f64>,
    systems: Vec<EigenSystem>,
    degenerate: Vec<bool>,
}

impl EigenFrame {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.systems[0].dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn system(&self, k: usize) -> &EigenSystem {
        &self.systems[k]
    }

    pub fn systems(&self) -> &[EigenSystem] {
        &self.systems
    }

    /// Whether the spectrum at grid point `k` has a degenerate cluster.
    pub fn is_degenerate_at(&self, k: usize) -> bool {
        self.degenerate[k]
    }

    pub fn value(&self, k: usize, n: usize) -> f64 {
        self.systems[k].values[n]
    }

    pub fn vector(&self, k: usize, n: usize) -> CVector {
        self.systems[k].vector(n)
    }

    /// Largest `|⟨φ_n(t_k)|φ_n(t_{k+1})⟩ - 1|` over labels and steps.
    pub fn transport_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.systems.windows(2) {
            for n in 0..w[0].dim() {
                let ov = w[0].vectors.column(n).dotc(&w[1].vectors.column(n));
                worst = worst.max((ov - C64::new(1.0, 0.0)).norm());
            }
        }
        worst
    }

    /// Linear interpolation of the frame at `t` (clamped to the grid range).
    /// Interpolated vectors are renormalised but not re-orthogonalised.
    pub fn reference_at(&self, t: f64) -> EigenSystem {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.systems[0].clone();
        }
        if k >= self.times.len() {
            return self.systems[self.times.len() - 1].clone();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        let a = &self.systems[k - 1];
        let b = &self.systems[k];
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (1.0 - w) * x + w * y)
            .collect();
        let mut vectors = &a.vectors * C64::new(1.0 - w, 0.0) + &b.vectors * C64::new(w, 0.0);
        for mut col in vectors.column_iter_mut() {
            let norm = col.norm();
            col /= C64::new(norm, 0.0);
        }
        EigenSystem { values, vectors }
    }

    /// Eigensystem of `op` (the operator at time `t`) with labels and phases
    /// continued from the interpolated frame. The resulting gauge is
    /// continuous in `t`.
    pub fn align_at(&self, op: &HermitianOperator, t: f64) -> Result<EigenSystem> {
        align(&self.reference_at(t), &eigendecompose(op), t)
    }
}

/// Follows the eigenvectors of `op` across `grid` by maximal overlap.
///
/// The frame is anchored at the first non-degenerate grid point, where labels
/// are in ascending eigenvalue order, and continued forwards and backwards.
/// Fails with [`Error::EigenCrossing`] when a continuation is ambiguous.
pub fn track_eigenframe(op: &TimeDependentOperator, grid: &[f64]) -> Result<EigenFrame> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be strictly increasing".into(),
        ));
    }
    let raws: Vec<EigenSystem> = grid
        .iter()
        .map(|&t| eigendecompose(&op.evaluate(t)))
        .collect();
    let degenerate: Vec<bool> = raws.iter().map(EigenSystem::is_degenerate).collect();
    let anchor = degenerate.iter().position(|d| !d).unwrap_or(0);

    let mut systems: Vec<Option<EigenSystem>> = vec![None; grid.len()];
    systems[anchor] = Some(raws[anchor].clone());
    for k in anchor + 1..grid.len() {
        let next = align(systems[k - 1].as_ref().unwrap(), &raws[k], grid[k])?;
        systems[k] = Some(next);
    }
    for k in (0..anchor).rev() {
        let next = align(systems[k + 1].as_ref().unwrap(), &raws[k], grid[k])?;
        systems[k] = Some(next);
    }
    Ok(EigenFrame {
        times: grid.to_vec(),
        systems: systems.into_iter().map(Option::unwrap).collect(),
        degenerate,
    })
}
