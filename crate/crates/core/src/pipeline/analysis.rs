use rayon::prelude::*;

use crate::context::{context_features, neighbor_set, ContextInput};
use crate::data::{FrameRecord, RegionMask, RgbdFrame};
use crate::error::{contract, Result};
use crate::features::{
    base_features_with_bounds, block_correspondences, estimate_homography, gaze_features, FeatureVector, Homography,
    GAZE_HISTORY,
};
use crate::num::Real;
use crate::proposals::{propose_regions, ucm_bounds, ContourMap, ProposalParams};
use crate::raster::Grid;

use super::layout::{FeatureConfig, FeatureLayout};
use super::SaliencyMap;

/// Candidate regions of one frame with what their shape features need.
#[derive(Debug, Clone)]
pub struct FrameRegions<T> {
    pub regions: Vec<RegionMask>,
    /// Merge-tree `(appear, disappear)` thresholds per region.
    pub ucm: Vec<(T, T)>,
    pub contour: ContourMap<T>,
}

impl<T: Real> FrameRegions<T> {
    /// Runs the built-in proposer.
    pub fn propose(frame: &RgbdFrame<T>, params: &ProposalParams) -> Result<Self> {
        let p = propose_regions(frame, params)?;
        let ucm = p
            .nodes
            .iter()
            .map(|&n| (p.tree.appear(n), p.tree.disappear(n)))
            .collect();
        Ok(Self {
            regions: p.regions,
            ucm,
            contour: p.contour,
        })
    }

    /// Uses externally supplied masks, reading thresholds from the built-in
    /// merge hierarchy of the frame.
    pub fn from_masks(frame: &RgbdFrame<T>, masks: Vec<RegionMask>, params: &ProposalParams) -> Result<Self> {
        let p = propose_regions(frame, params)?;
        let ucm = masks
            .iter()
            .map(|m| ucm_bounds(m, &p.tree))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            regions: masks,
            ucm,
            contour: p.contour,
        })
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn base_features(&self, frame: &RgbdFrame<T>) -> Result<Vec<FeatureVector<T>>> {
        self.regions
            .par_iter()
            .zip(&self.ucm)
            .map(|(r, &b)| base_features_with_bounds(r, &self.contour, b, frame.depth()))
            .collect()
    }
}

/// Homography mapping each frame into the next; entry 0 is the identity
/// and failed estimates fall back to it.
pub fn frame_steps<T: Real>(grays: &[Grid<T>], cfg: &FeatureConfig) -> Vec<Homography> {
    (0..grays.len())
        .into_par_iter()
        .map(|t| {
            if t == 0 {
                return Homography::identity();
            }
            let pairs = block_correspondences(&grays[t - 1], &grays[t], &cfg.block_match);
            estimate_homography(&pairs, &cfg.ransac).unwrap_or_else(|e| {
                log::warn!(
                    "frame {}: homography from the previous frame unavailable ({}); using identity",
                    t,
                    e
                );
                Homography::identity()
            })
        })
        .collect()
}

/// Maps frame `t - k` into frame `t` for `k = 1..=5` by chaining `steps`,
/// identity where no history exists.
pub fn gaze_history(steps: &[Homography], pos: usize) -> Vec<Homography> {
    let mut acc = Homography::identity();
    (1..=GAZE_HISTORY)
        .map(|k| {
            if pos < k || pos >= steps.len() {
                return Homography::identity();
            }
            acc = steps[pos + 1 - k].then(&acc).unwrap_or_else(|e| {
                log::warn!("frame {}: degenerate chained homography ({}); using identity", pos, e);
                Homography::identity()
            });
            acc
        })
        .collect()
}

fn rows_for<T: Real>(
    regions: &[RegionMask],
    base: &[FeatureVector<T>],
    layout: &FeatureLayout,
    gaze: Option<&[Homography]>,
    select: &[usize],
) -> Result<Vec<Vec<T>>> {
    if layout.gaze != gaze.is_some() {
        return contract("gaze homographies must be supplied exactly when the layout has gaze columns");
    }
    let inputs: Vec<ContextInput<'_, T>> = regions
        .iter()
        .zip(base)
        .enumerate()
        .map(|(id, (r, f))| ContextInput {
            id,
            centroid: r.centroid(),
            features: f.values(),
        })
        .collect();
    let kept = layout.kept_columns();
    select
        .par_iter()
        .map(|&i| {
            if i >= regions.len() {
                return contract(format!("region {} out of range", i));
            }
            let set = neighbor_set(i, &inputs, layout.context.n_neighbors)?;
            let mut full = base[i].values().to_vec();
            full.extend(context_features(base[i].values(), &set, layout.context.knn)?);
            if let Some(h) = gaze {
                full.extend(gaze_features::<T>(&regions[i], h)?);
            }
            Ok(kept.iter().map(|&c| full[c]).collect())
        })
        .collect()
}

/// One feature row per region, in region order.
pub fn extract_frame_features<T: Real>(
    frame: &RgbdFrame<T>,
    regions: &FrameRegions<T>,
    layout: &FeatureLayout,
    gaze: Option<&[Homography]>,
) -> Result<Vec<Vec<T>>> {
    if regions.is_empty() {
        return Ok(Vec::new());
    }
    let base = regions.base_features(frame)?;
    let all: Vec<usize> = (0..regions.len()).collect();
    rows_for(&regions.regions, &base, layout, gaze, &all)
}

/// Per-pixel maximum of the scores of the regions covering it, clamped to
/// `[0, 1]`; uncovered pixels score 0.
pub fn aggregate_max<T: Real>(dims: (usize, usize), regions: &[RegionMask], scores: &[T]) -> Result<SaliencyMap<T>> {
    if regions.len() != scores.len() {
        return contract(format!("{} regions but {} scores", regions.len(), scores.len()));
    }
    let mut map = Grid::filled(dims.0, dims.1, T::zero());
    for (r, &s) in regions.iter().zip(scores) {
        if r.dims() != dims {
            return contract("region dims differ from the map");
        }
        let s = crate::num::clamp_unit(s);
        for &p in r.indices() {
            let v = &mut map.data_mut()[p as usize];
            if s > *v {
                *v = s;
            }
        }
    }
    Ok(map)
}

/// A frame with its regions, base vectors and (optionally) gaze history.
#[derive(Debug, Clone)]
pub struct FrameAnalysis<T> {
    pub record: FrameRecord<T>,
    pub regions: FrameRegions<T>,
    pub base: Vec<FeatureVector<T>>,
    pub gaze: Option<Vec<Homography>>,
}

impl<T: Real> FrameAnalysis<T> {
    pub fn rows(&self, layout: &FeatureLayout, select: &[usize]) -> Result<Vec<Vec<T>>> {
        let gaze = if layout.gaze {
            Some(
                self.gaze
                    .as_deref()
                    .ok_or_else(|| crate::Error::Contract("frame was analyzed without gaze history".into()))?,
            )
        } else {
            None
        };
        rows_for(&self.regions.regions, &self.base, layout, gaze, select)
    }

    pub fn all_rows(&self, layout: &FeatureLayout) -> Result<Vec<Vec<T>>> {
        let all: Vec<usize> = (0..self.regions.len()).collect();
        self.rows(layout, &all)
    }
}

#[derive(Debug, Clone)]
pub struct SequenceAnalysis<T> {
    pub id: String,
    pub frames: Vec<FrameAnalysis<T>>,
}

/// Analyzes the frames of one sequence for which `keep` holds; gaze history
/// is computed from all frames when `gaze` is set.
pub fn analyze_sequence<T: Real>(
    id: &str,
    records: Vec<FrameRecord<T>>,
    cfg: &FeatureConfig,
    gaze: bool,
    keep: impl Fn(&FrameRecord<T>) -> bool + Sync,
) -> Result<SequenceAnalysis<T>> {
    let steps = if gaze {
        let grays: Vec<Grid<T>> = records.par_iter().map(|r| r.frame.gray()).collect();
        frame_steps(&grays, cfg)
    } else {
        Vec::new()
    };
    let frames = records
        .into_par_iter()
        .enumerate()
        .filter(|(_, r)| keep(r))
        .map(|(pos, record)| {
            let regions = FrameRegions::propose(&record.frame, &cfg.proposals)?;
            let base = regions.base_features(&record.frame)?;
            let gaze = gaze.then(|| gaze_history(&steps, pos));
            Ok(FrameAnalysis {
                record,
                regions,
                base,
                gaze,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceAnalysis {
        id: id.to_string(),
        frames,
    })
}
