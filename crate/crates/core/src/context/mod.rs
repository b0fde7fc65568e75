//! Neighbor-context descriptors: how a region's base vector differs from
//! pooled and nearest-neighbor vectors in the same frame.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::features::BASE_DIM;
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextParams {
    /// Neighbors pooled per region.
    pub n_neighbors: usize,
    /// Nearest neighbors contributing individual difference blocks.
    pub knn: usize,
}

impl Default for ContextParams {
    fn default() -> Self {
        Self {
            n_neighbors: 32,
            knn: 3,
        }
    }
}

impl ContextParams {
    pub fn dim(&self) -> usize {
        (3 + self.knn) * BASE_DIM
    }
}

/// One region as seen by the neighborhood search.
#[derive(Debug, Clone, Copy)]
pub struct ContextInput<'a, T> {
    pub id: usize,
    /// `(row, col)` centroid in pixels.
    pub centroid: (f64, f64),
    pub features: &'a [T],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet<T> {
    pub target: usize,
    /// Ascending centroid distance, ties by id.
    pub neighbors: Vec<usize>,
    /// Base vectors of `neighbors`, same order.
    pub vectors: Vec<Vec<T>>,
    pub min: Vec<T>,
    pub mean: Vec<T>,
    pub max: Vec<T>,
}

/// The `n` regions closest to `target` by centroid distance, with their
/// elementwise min, mean and max pooled vectors.
pub fn neighbor_set<T: Real>(target: usize, all: &[ContextInput<'_, T>], n: usize) -> Result<NeighborSet<T>> {
    let Some(me) = all.iter().find(|r| r.id == target) else {
        return contract(format!("region {} is not in the input set", target));
    };
    let dim = me.features.len();
    let mut ids: Vec<usize> = all.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return contract("duplicate region ids");
    }
    if all.iter().any(|r| r.features.len() != dim) {
        return contract("feature vectors differ in length");
    }

    let mut others: Vec<(f64, &ContextInput<'_, T>)> = all
        .iter()
        .filter(|r| r.id != target)
        .map(|r| {
            let (dy, dx) = (r.centroid.0 - me.centroid.0, r.centroid.1 - me.centroid.1);
            (dy * dy + dx * dx, r)
        })
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    others.truncate(n);

    let mut min = vec![T::zero(); dim];
    let mut mean = vec![T::zero(); dim];
    let mut max = vec![T::zero(); dim];
    if !others.is_empty() {
        min = vec![T::infinity(); dim];
        max = vec![T::neg_infinity(); dim];
        for (_, r) in &others {
            for (j, &v) in r.features.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
                mean[j] += v;
            }
        }
        let count = T::from_usize_lossy(others.len());
        mean.iter_mut().for_each(|v| *v /= count);
    }
    Ok(NeighborSet {
        target,
        neighbors: others.iter().map(|(_, r)| r.id).collect(),
        vectors: others.iter().map(|(_, r)| r.features.to_vec()).collect(),
        min,
        mean,
        max,
    })
}

/// `|x - min|, |x - mean|, |x - max|`, then `|x - x_j|` for the `k` nearest
/// neighbors, zero-filled when fewer exist. Length `(3 + k) * len(x)`.
pub fn context_features<T: Real>(target: &[T], nbrs: &NeighborSet<T>, k: usize) -> Result<Vec<T>> {
    let dim = target.len();
    if nbrs.min.len() != dim || nbrs.vectors.iter().any(|v| v.len() != dim) {
        return contract("context vectors differ in length from the target");
    }
    let mut out = Vec::with_capacity((3 + k) * dim);
    let diff = |out: &mut Vec<T>, other: &[T]| out.extend(target.iter().zip(other).map(|(&a, &b)| (a - b).abs()));
    if nbrs.neighbors.is_empty() {
        out.resize(3 * dim, T::zero());
    } else {
        diff(&mut out, &nbrs.min);
        diff(&mut out, &nbrs.mean);
        diff(&mut out, &nbrs.max);
    }
    for j in 0..k {
        match nbrs.vectors.get(j) {
            Some(v) => diff(&mut out, v),
            None => out.resize(out.len() + dim, T::zero()),
        }
    }
    Ok(out)
}

/// Context block of every region in a frame, region order preserved.
pub fn frame_context<T: Real>(all: &[ContextInput<'_, T>], params: &ContextParams) -> Result<Vec<Vec<T>>> {
    all.par_iter()
        .map(|r| {
            let set = neighbor_set(r.id, all, params.n_neighbors)?;
            context_features(r.features, &set, params.knn)
        })
        .collect()
}
