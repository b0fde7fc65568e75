use crate::data::{Interaction, RegionMask};
use crate::error::{contract, Error, Result};
use crate::num::Real;
use crate::raster::Grid;

use super::analysis::FrameAnalysis;
use super::train::TaskModel;

/// Regions voting on a frame's interaction label.
pub const TOP_REGIONS: usize = 15;

/// Region indices by descending score, ties by ascending index.
pub fn ranking<T: Real>(scores: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Majority label of the `TOP_REGIONS` most salient regions, each voting
/// touch when its touch probability is at least 0.5. Ties go to touch.
pub fn majority_vote<T: Real>(saliency: &[T], touch_prob: &[T]) -> Result<Interaction> {
    if saliency.len() != touch_prob.len() {
        return contract("saliency and touch probabilities differ in length");
    }
    if saliency.is_empty() {
        return Err(Error::Classification("no regions to vote".into()));
    }
    let order = ranking(saliency);
    let top = &order[..order.len().min(TOP_REGIONS)];
    let half = T::lit(0.5);
    let touch = top.iter().filter(|&&i| touch_prob[i] >= half).count();
    Ok(if 2 * touch >= top.len() {
        Interaction::Touch
    } else {
        Interaction::Sight
    })
}

pub fn classify_interaction<T: Real>(
    frame: &FrameAnalysis<T>,
    saliency_model: &TaskModel<T>,
    interaction_model: &TaskModel<T>,
) -> Result<Interaction> {
    let sal = saliency_model.predict_rows(&frame.all_rows(&saliency_model.layout())?)?;
    let touch = interaction_model.predict_rows(&frame.all_rows(&interaction_model.layout())?)?;
    majority_vote(&sal, &touch)
}

/// Mean valid depth over a region.
pub fn region_mean_depth<T: Real>(region: &RegionMask, depth: &Grid<T>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (r, c) in region.pixels() {
        let d = depth.get(r, c).as_f64();
        if d.is_finite() && d > 0.0 {
            sum += d;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Sight/touch by depth alone: touch when the salient region is no farther
/// than `threshold` meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthThreshold {
    pub threshold: f64,
}

impl DepthThreshold {
    /// Picks the training-accuracy maximizing threshold among `-inf`, the
    /// midpoints between sorted distinct depths and `+inf`; the lowest
    /// candidate wins ties.
    pub fn fit(samples: &[(f64, Interaction)]) -> Self {
        let mut depths: Vec<f64> = samples.iter().map(|s| s.0).filter(|d| d.is_finite()).collect();
        depths.sort_by(f64::total_cmp);
        depths.dedup();
        let mut candidates = vec![f64::NEG_INFINITY];
        candidates.extend(depths.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        candidates.push(f64::INFINITY);
        let mut best = (f64::NEG_INFINITY, usize::MIN);
        for (k, &t) in candidates.iter().enumerate() {
            let model = Self { threshold: t };
            let hits = samples.iter().filter(|s| model.classify(s.0) == s.1).count();
            if k == 0 || hits > best.1 {
                best = (t, hits);
            }
        }
        Self { threshold: best.0 }
    }

    pub fn classify(&self, depth: f64) -> Interaction {
        if depth <= self.threshold {
            Interaction::Touch
        } else {
            Interaction::Sight
        }
    }
}
