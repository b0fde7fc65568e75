use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::num::Real;

use super::Mode;

/// Tree node. Classification leaves hold the touch probability; the sight
/// probability is its complement.
#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        value: T,
    },
}

/// Decision tree stored in preorder; node 0 is the root and a split's left
/// child immediately follows it.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<T> {
    pub(crate) nodes: Vec<Node<T>>,
}

impl<T: Real> Tree<T> {
    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    /// Samples go left when `x[feature] <= threshold`.
    pub fn predict(&self, x: &[T]) -> T {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub(crate) struct Grower<'a, T> {
    pub x: &'a [Vec<T>],
    pub y: &'a [T],
    pub mode: Mode,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub mtry: usize,
    pub rng: ChaCha8Rng,
    pub importance: Vec<f64>,
    pub nodes: Vec<Node<T>>,
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    feature: usize,
    threshold: T,
    gain: f64,
}

impl<T: Real> Grower<'_, T> {
    fn leaf_value(&self, idx: &[usize]) -> T {
        if self.pure(idx) {
            return self.y[idx[0]];
        }
        let sum: T = idx.iter().map(|&i| self.y[i]).sum();
        sum / T::from_usize_lossy(idx.len())
    }

    fn pure(&self, idx: &[usize]) -> bool {
        let first = self.y[idx[0]];
        idx.iter().all(|&i| self.y[i] == first)
    }

    /// Impurity of a node scaled by its size: SSE for regression, n * Gini
    /// for classification.
    fn impurity(&self, n: f64, sum: f64, sumsq: f64) -> f64 {
        match self.mode {
            Mode::Regression => (sumsq - sum * sum / n).max(0.0),
            // Targets are 0/1, so `sum` counts touch samples.
            Mode::Classification => 2.0 * sum * (n - sum) / n,
        }
    }

    fn best_for_feature(
        &self,
        idx: &[usize],
        f: usize,
        parent: f64,
        scratch: &mut Vec<(T, f64)>,
    ) -> Option<Candidate<T>> {
        scratch.clear();
        scratch.extend(idx.iter().map(|&i| (self.x[i][f], self.y[i].as_f64())));
        scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        let n = scratch.len();
        let (total, total_sq) = scratch.iter().fold((0.0, 0.0), |a, s| (a.0 + s.1, a.1 + s.1 * s.1));
        let (mut sum, mut sumsq) = (0.0, 0.0);
        let mut best: Option<Candidate<T>> = None;
        for p in 1..n {
            let y = scratch[p - 1].1;
            sum += y;
            sumsq += y * y;
            if p < self.min_leaf || n - p < self.min_leaf || scratch[p - 1].0 >= scratch[p].0 {
                continue;
            }
            let (nl, nr) = (p as f64, (n - p) as f64);
            let gain = parent - self.impurity(nl, sum, sumsq) - self.impurity(nr, total - sum, total_sq - sumsq);
            if best.is_none_or(|b| gain > b.gain) {
                let (a, b) = (scratch[p - 1].0, scratch[p].0);
                let mut threshold = (a + b) / (T::one() + T::one());
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    fn search(&self, idx: &[usize], features: impl Iterator<Item = usize>, parent: f64) -> Option<Candidate<T>> {
        let mut scratch = Vec::with_capacity(idx.len());
        let mut best: Option<Candidate<T>> = None;
        for f in features {
            if let Some(c) = self.best_for_feature(idx, f, parent, &mut scratch) {
                if best.is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Grows the subtree over `idx` and returns its root node id.
    pub fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let leaf = Node::Leaf {
            value: self.leaf_value(idx),
        };
        if idx.len() < 2 * self.min_leaf || self.pure(idx) || self.max_depth.is_some_and(|d| depth >= d) {
            self.nodes.push(leaf);
            return id;
        }
        let (sum, sumsq) = idx.iter().fold((0.0, 0.0), |a, &i| {
            let y = self.y[i].as_f64();
            (a.0 + y, a.1 + y * y)
        });
        let parent = self.impurity(idx.len() as f64, sum, sumsq);
        let dim = self.x[idx[0]].len();
        let mut candidates = sample(&mut self.rng, dim, self.mtry.min(dim)).into_vec();
        candidates.sort_unstable();
        // Fall back to every feature when the sampled ones cannot split.
        let best = self
            .search(idx, candidates.into_iter(), parent)
            .or_else(|| self.search(idx, 0..dim, parent));
        let Some(best) = best else {
            self.nodes.push(leaf);
            return id;
        };
        self.importance[best.feature] += best.gain.max(0.0);

        let mut split = 0;
        for k in 0..idx.len() {
            if self.x[idx[k]][best.feature] <= best.threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        self.nodes.push(leaf);
        let (l, r) = idx.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }
}

pub(crate) fn bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    idx.sort_unstable();
    idx
}
