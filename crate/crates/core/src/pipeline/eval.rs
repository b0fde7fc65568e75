use crate::data::{FrameRecord, Interaction};
use crate::error::{contract, Error, Result};
use crate::metrics::{average_precision, interaction_accuracy, max_f_score, PrAccumulator, PrCurve};
use crate::num::Real;
use crate::raster::Grid;

use super::analysis::{aggregate_max, analyze_sequence, SequenceAnalysis};
use super::interact::{classify_interaction, ranking, region_mean_depth, DepthThreshold};
use super::layout::FeatureConfig;
use super::source::FrameSource;
use super::train::{train_from_analyses, Task, TaskConfig, TaskModel};

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceScore {
    pub sequence: String,
    pub mf: f64,
    pub ap: f64,
}

impl SequenceScore {
    fn from_curve(sequence: &str, curve: &PrCurve) -> Self {
        Self {
            sequence: sequence.to_string(),
            mf: max_f_score(curve),
            ap: average_precision(curve),
        }
    }
}

/// Analyzes every sequence of `source`.
pub fn analyze_source<T: Real, S: FrameSource<T> + ?Sized>(
    source: &S,
    cfg: &FeatureConfig,
    gaze: bool,
    keep: impl Fn(&FrameRecord<T>) -> bool + Sync + Copy,
) -> Result<Vec<SequenceAnalysis<T>>> {
    source
        .sequence_ids()
        .iter()
        .map(|id| analyze_sequence(id, source.load_sequence(id)?, cfg, gaze, keep))
        .collect()
}

/// Pooled PR curve of `model`'s saliency maps against the ground truth
/// `target` selects on each frame that has it.
pub fn evaluate_maps<T: Real>(seq: &SequenceAnalysis<T>, model: &TaskModel<T>, target: Task) -> Result<PrCurve> {
    if model.task == Task::Interaction {
        return contract("an interaction model does not produce saliency maps");
    }
    let layout = model.layout();
    let mut acc = PrAccumulator::default();
    for fa in &seq.frames {
        let Some(gt) = target.target(&fa.record) else { continue };
        let scores = model.predict_rows(&fa.all_rows(&layout)?)?;
        let map = aggregate_max(fa.record.frame.dims(), &fa.regions.regions, &scores)?;
        acc.add(&map, gt)?;
    }
    acc.curve()
}

/// Pooled PR curve of a constant 0.5 map.
pub fn uniform_baseline<T: Real>(seq: &SequenceAnalysis<T>, target: Task) -> Result<PrCurve> {
    let mut acc = PrAccumulator::default();
    for fa in &seq.frames {
        let Some(gt) = target.target(&fa.record) else { continue };
        let (w, h) = fa.record.frame.dims();
        acc.add(&Grid::filled(w, h, T::lit(0.5)), gt)?;
    }
    acc.curve()
}

/// Leave-one-sequence-out scores of `task`, one per sequence.
pub fn cross_validate<T: Real>(
    analyses: &[SequenceAnalysis<T>],
    task: Task,
    cfg: &TaskConfig,
) -> Result<Vec<SequenceScore>> {
    if task == Task::Interaction {
        return contract("use evaluate_interaction for the interaction task");
    }
    analyses
        .iter()
        .map(|test| {
            let model = train_from_analyses(analyses, task, Some(&test.id), cfg)?;
            Ok(SequenceScore::from_curve(&test.id, &evaluate_maps(test, &model, task)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionScore {
    pub sequence: String,
    /// Accuracy of the top-region majority vote.
    pub ours: f64,
    /// Accuracy of the depth-threshold rule on the top saliency region.
    pub baseline: f64,
    pub threshold: f64,
}

/// Scores both interaction classifiers on `held_out`; the depth threshold
/// is fitted on the ground-truth regions of every other sequence.
pub fn evaluate_interaction<T: Real>(
    analyses: &[SequenceAnalysis<T>],
    held_out: &str,
    saliency_model: &TaskModel<T>,
    interaction_model: &TaskModel<T>,
) -> Result<InteractionScore> {
    let Some(test) = analyses.iter().find(|s| s.id == held_out) else {
        return contract(format!("held-out sequence '{}' was not analyzed", held_out));
    };
    let mut samples = Vec::new();
    for seq in analyses.iter().filter(|s| s.id != held_out) {
        for fa in &seq.frames {
            let rec = &fa.record;
            if let (Some(label), Some(mask)) = (rec.interaction, rec.gt.as_ref().and_then(|g| g.mask.as_ref())) {
                if let Some(d) = region_mean_depth(mask, rec.frame.depth()) {
                    samples.push((d, label));
                }
            }
        }
    }
    let rule = DepthThreshold::fit(&samples);

    let (mut truth, mut ours, mut base): (Vec<Interaction>, Vec<Interaction>, Vec<Interaction>) = Default::default();
    for fa in &test.frames {
        let Some(label) = fa.record.interaction else { continue };
        if fa.regions.is_empty() {
            return Err(Error::Classification(format!(
                "frame {} has no regions",
                fa.record.frame.frame_index
            )));
        }
        truth.push(label);
        ours.push(classify_interaction(fa, saliency_model, interaction_model)?);
        let sal = saliency_model.predict_rows(&fa.all_rows(&saliency_model.layout())?)?;
        let top = ranking(&sal)[0];
        let d = region_mean_depth(&fa.regions.regions[top], fa.record.frame.depth()).unwrap_or(f64::INFINITY);
        base.push(rule.classify(d));
    }
    Ok(InteractionScore {
        sequence: held_out.to_string(),
        ours: interaction_accuracy(&ours, &truth)?,
        baseline: interaction_accuracy(&base, &truth)?,
        threshold: rule.threshold,
    })
}
