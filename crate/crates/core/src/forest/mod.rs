//! Random forest for IOU regression and sight/touch classification.

mod io;
mod sample;
mod tree;

pub use sample::{balanced_sample, iou_bin};
pub use tree::{Node, Tree};

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{contract, Error, Result};
use crate::num::Real;

use tree::{bootstrap, Grower};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Regression,
    /// Targets are 0 (sight) or 1 (touch); predictions are touch probabilities.
    Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// `None` uses the ceiling of the square root of the feature count.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: None,
            min_leaf: 5,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest<T> {
    mode: Mode,
    feature_dim: usize,
    layout_id: String,
    metadata: String,
    trees: Vec<Tree<T>>,
    /// Impurity reduction per feature, averaged over trees.
    importance: Vec<f64>,
}

fn validate<T: Real>(x: &[Vec<T>], y: &[T], cfg: &TrainConfig, mode: Mode) -> Result<usize> {
    if cfg.n_trees == 0 || cfg.min_leaf == 0 {
        return contract("n_trees and min_leaf must be at least 1");
    }
    if x.len() != y.len() {
        return contract(format!("{} feature rows but {} targets", x.len(), y.len()));
    }
    if x.len() < 2 * cfg.min_leaf || x.is_empty() {
        return Err(Error::Training(format!(
            "{} examples, need at least {}",
            x.len(),
            (2 * cfg.min_leaf).max(1)
        )));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return contract("feature rows must share a non-zero length");
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return contract("feature matrix contains non-finite values");
    }
    let ok = match mode {
        Mode::Regression => y.iter().all(|&t| t >= T::zero() && t <= T::one()),
        Mode::Classification => y.iter().all(|&t| t == T::zero() || t == T::one()),
    };
    if !ok {
        return contract(match mode {
            Mode::Regression => "regression targets must lie in [0, 1]",
            Mode::Classification => "classification targets must be 0 (sight) or 1 (touch)",
        });
    }
    Ok(dim)
}

impl<T: Real> Forest<T> {
    /// Trains trees in parallel. Identical to [`Forest::train_serial`].
    pub fn train(x: &[Vec<T>], y: &[T], cfg: &TrainConfig, mode: Mode) -> Result<Self> {
        Self::fit(x, y, cfg, mode, true)
    }

    pub fn train_serial(x: &[Vec<T>], y: &[T], cfg: &TrainConfig, mode: Mode) -> Result<Self> {
        Self::fit(x, y, cfg, mode, false)
    }

    fn fit(x: &[Vec<T>], y: &[T], cfg: &TrainConfig, mode: Mode, parallel: bool) -> Result<Self> {
        let dim = validate(x, y, cfg, mode)?;
        let mtry = cfg
            .features_per_split
            .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
            .clamp(1, dim);
        let grow_one = |t: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64);
            let mut idx = if cfg.bootstrap {
                bootstrap(&mut rng, x.len())
            } else {
                (0..x.len()).collect()
            };
            let mut g = Grower {
                x,
                y,
                mode,
                min_leaf: cfg.min_leaf,
                max_depth: cfg.max_depth,
                mtry,
                rng,
                importance: vec![0.0; dim],
                nodes: Vec::new(),
            };
            g.grow(&mut idx, 0);
            (Tree { nodes: g.nodes }, g.importance)
        };
        let grown: Vec<(Tree<T>, Vec<f64>)> = if parallel {
            (0..cfg.n_trees).into_par_iter().map(grow_one).collect()
        } else {
            (0..cfg.n_trees).map(grow_one).collect()
        };
        let mut importance = vec![0.0; dim];
        let mut trees = Vec::with_capacity(grown.len());
        for (tree, imp) in grown {
            importance.iter_mut().zip(&imp).for_each(|(a, b)| *a += b);
            trees.push(tree);
        }
        importance.iter_mut().for_each(|v| *v /= cfg.n_trees as f64);
        Ok(Self {
            mode,
            feature_dim: dim,
            layout_id: String::new(),
            metadata: String::new(),
            trees,
            importance,
        })
    }

    /// Tags the forest with the feature layout it was trained on and free-form
    /// provenance text.
    pub fn with_layout(mut self, layout_id: impl Into<String>, metadata: impl Into<String>) -> Self {
        self.layout_id = layout_id.into();
        self.metadata = metadata.into();
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn layout_id(&self) -> &str {
        &self.layout_id
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }

    pub fn trees(&self) -> &[Tree<T>] {
        &self.trees
    }

    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    /// Fails unless the forest was trained on `layout_id` features.
    pub fn ensure_layout(&self, layout_id: &str) -> Result<()> {
        if self.layout_id != layout_id {
            return contract(format!(
                "model layout '{}' does not match feature layout '{}'",
                self.layout_id, layout_id
            ));
        }
        Ok(())
    }

    /// Mean leaf value over trees: IOU estimate or touch probability.
    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.feature_dim {
            return contract(format!(
                "feature vector has {} entries, model expects {}",
                x.len(),
                self.feature_dim
            ));
        }
        let sum: T = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(sum / T::from_usize_lossy(self.trees.len()))
    }

    /// Mean importance of each group's features. `groups` maps feature
    /// index to group.
    pub fn group_importance<G: Ord + Clone>(&self, groups: &BTreeMap<usize, G>) -> Result<BTreeMap<G, f64>> {
        if self.mode != Mode::Regression {
            return contract("feature importance needs a regression forest");
        }
        let mut acc: BTreeMap<G, (f64, usize)> = BTreeMap::new();
        for (&i, g) in groups {
            let Some(&v) = self.importance.get(i) else {
                return contract(format!(
                    "feature {} is outside the model's {} features",
                    i, self.feature_dim
                ));
            };
            let e = acc.entry(g.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        Ok(acc.into_iter().map(|(g, (s, n))| (g, s / n as f64)).collect())
    }
}

/// Per-group mean importance of a regression forest.
pub fn feature_importance<T: Real, G: Ord + Clone>(
    forest: &Forest<T>,
    groups: &BTreeMap<usize, G>,
) -> Result<BTreeMap<G, f64>> {
    forest.group_importance(groups)
}
