use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::context::ContextParams;
use crate::features::{
    base_feature_names, BlockMatchParams, FeatureGroup, RansacParams, BASE_DIM, BASE_LAYOUT_ID, GAZE_DIM,
};
use crate::proposals::ProposalParams;

/// Everything that determines how a frame turns into feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub context: ContextParams,
    /// When false, every depth-derived column is dropped.
    pub depth: bool,
    pub proposals: ProposalParams,
    pub block_match: BlockMatchParams,
    pub ransac: RansacParams,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            context: ContextParams::default(),
            depth: true,
            proposals: ProposalParams::default(),
            block_match: BlockMatchParams::default(),
            ransac: RansacParams::default(),
        }
    }
}

impl FeatureConfig {
    pub fn layout(&self, gaze: bool) -> FeatureLayout {
        FeatureLayout {
            context: self.context,
            gaze,
            depth: self.depth,
        }
    }
}

/// Column layout of a feature row: base block, `3 + k` context blocks,
/// optional gaze distances, minus depth columns in the no-depth variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub context: ContextParams,
    pub gaze: bool,
    pub depth: bool,
}

const DEPTH_COLUMNS: std::ops::RangeInclusive<usize> = 31..=76;

impl FeatureLayout {
    /// Width before depth columns are dropped.
    pub fn full_dim(&self) -> usize {
        BASE_DIM + self.context.dim() + if self.gaze { GAZE_DIM } else { 0 }
    }

    fn base_index(&self, col: usize) -> Option<usize> {
        (col < BASE_DIM + self.context.dim()).then_some(col % BASE_DIM)
    }

    pub(crate) fn keeps(&self, col: usize) -> bool {
        self.depth || !self.base_index(col).is_some_and(|i| DEPTH_COLUMNS.contains(&i))
    }

    /// Indices of the full row retained in the output row.
    pub fn kept_columns(&self) -> Vec<usize> {
        (0..self.full_dim()).filter(|&c| self.keeps(c)).collect()
    }

    pub fn dim(&self) -> usize {
        self.kept_columns().len()
    }

    pub fn id(&self) -> String {
        format!(
            "{}+ctx{}x{}{}{}",
            BASE_LAYOUT_ID,
            self.context.n_neighbors,
            self.context.knn,
            if self.gaze { "+gaze5" } else { "" },
            if self.depth { "" } else { "-depth" }
        )
    }

    pub fn names(&self) -> Vec<String> {
        let base = base_feature_names();
        let mut all = base.clone();
        let blocks = ["ctx_min", "ctx_mean", "ctx_max"]
            .map(String::from)
            .into_iter()
            .chain((1..=self.context.knn).map(|j| format!("ctx_nn{}", j)));
        for block in blocks {
            all.extend(base.iter().map(|n| format!("{}_{}", block, n)));
        }
        if self.gaze {
            all.extend((1..=GAZE_DIM).map(|k| format!("gaze_dist_{}", k)));
        }
        self.kept_columns().into_iter().map(|c| all[c].clone()).collect()
    }

    /// Importance group of every output column. Gaze distances count as
    /// location cues.
    pub fn groups(&self) -> BTreeMap<usize, FeatureGroup> {
        self.kept_columns()
            .into_iter()
            .enumerate()
            .map(|(out, col)| {
                let g = match self.base_index(col) {
                    Some(i) if col < BASE_DIM => FeatureGroup::of_base(i).expect("base index"),
                    Some(i) => FeatureGroup::of_base(i).expect("base index").context(),
                    None => FeatureGroup::Location,
                };
                (out, g)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims() {
        let cfg = FeatureConfig::default();
        assert_eq!(cfg.layout(false).dim(), 539);
        assert_eq!(cfg.layout(true).dim(), 544);
        let no_depth = FeatureConfig {
            depth: false,
            ..cfg.clone()
        };
        assert_eq!(no_depth.layout(false).dim(), 31 * 7);
        assert_eq!(no_depth.layout(true).dim(), 31 * 7 + 5);
        let k0 = FeatureConfig {
            context: ContextParams { n_neighbors: 8, knn: 0 },
            ..cfg
        };
        assert_eq!(k0.layout(false).dim(), 77 * 4);
    }

    #[test]
    fn names_and_groups_align() {
        for gaze in [false, true] {
            for depth in [false, true] {
                let l = FeatureConfig {
                    depth,
                    ..FeatureConfig::default()
                }
                .layout(gaze);
                assert_eq!(l.names().len(), l.dim());
                assert_eq!(l.groups().len(), l.dim());
            }
        }
        let l = FeatureConfig::default().layout(true);
        let g = l.groups();
        assert_eq!(g[&0], FeatureGroup::Shape);
        assert_eq!(g[&77], FeatureGroup::ShapeContext);
        assert_eq!(g[&(77 + 31)], FeatureGroup::DepthContext);
        assert_eq!(g[&539], FeatureGroup::Location);
        assert_eq!(l.names()[539], "gaze_dist_1");
        assert_ne!(l.id(), FeatureConfig::default().layout(false).id());
    }
}
