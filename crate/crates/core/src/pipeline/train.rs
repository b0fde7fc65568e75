use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{FrameRecord, GroundTruth, Interaction, VALID_HORIZONS};
use crate::error::{contract, Error, Result};
use crate::forest::{balanced_sample, Forest, Mode, TrainConfig};
use crate::num::Real;

use super::analysis::{analyze_sequence, SequenceAnalysis};
use super::layout::{FeatureConfig, FeatureLayout};
use super::source::FrameSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Saliency,
    /// Future saliency at a horizon of 2, 4 or 6 seconds.
    Future(u32),
    Interaction,
}

impl Task {
    pub fn uses_gaze(self) -> bool {
        matches!(self, Task::Future(_))
    }

    pub fn mode(self) -> Mode {
        match self {
            Task::Interaction => Mode::Classification,
            _ => Mode::Regression,
        }
    }

    /// Ground truth this task is trained and scored against, if the frame has it.
    pub fn target<T>(self, rec: &FrameRecord<T>) -> Option<&GroundTruth> {
        match self {
            Task::Saliency | Task::Interaction => rec.gt.as_ref(),
            Task::Future(h) => rec.future_at(h).map(|f| &f.mask),
        }
    }

    pub(crate) fn has_labels<T>(self, rec: &FrameRecord<T>) -> bool {
        self.target(rec).is_some() && (self != Task::Interaction || rec.interaction.is_some())
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Saliency => f.write_str("saliency"),
            Task::Future(h) => write!(f, "future{}", h),
            Task::Interaction => f.write_str("interaction"),
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "saliency" => Ok(Task::Saliency),
            "interaction" => Ok(Task::Interaction),
            _ => match s.strip_prefix("future").and_then(|h| h.parse::<u32>().ok()) {
                Some(h) if VALID_HORIZONS.contains(&h) => Ok(Task::Future(h)),
                _ => Err(Error::Spec(format!(
                    "unknown task '{}' (expected saliency, future2, future4, future6 or interaction)",
                    s
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub features: FeatureConfig,
    #[serde(skip)]
    pub forest: TrainConfig,
    /// Training regions drawn uniformly before IOU-bin balancing.
    pub region_budget: usize,
    /// Minimum IOU with the ground truth for a region to carry the frame's
    /// interaction label.
    pub interaction_iou: f64,
    pub seed: u64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            forest: TrainConfig::default(),
            region_budget: 70_000,
            interaction_iou: 0.5,
            seed: 0,
        }
    }
}

/// Provenance stored in the model file next to the forest.
#[derive(Debug, Serialize, Deserialize)]
struct ModelMeta {
    task: String,
    features: FeatureConfig,
    held_out: Option<String>,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskModel<T> {
    pub task: Task,
    pub forest: Forest<T>,
    pub features: FeatureConfig,
    pub held_out: Option<String>,
    pub seed: u64,
}

impl<T: Real> TaskModel<T> {
    pub fn layout(&self) -> FeatureLayout {
        self.features.layout(self.task.uses_gaze())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.forest.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let forest = Forest::<T>::load(path)?;
        let meta: ModelMeta = serde_json::from_str(forest.metadata())
            .map_err(|e| Error::Deserialize(format!("model metadata: {}", e)))?;
        let task: Task = meta.task.parse()?;
        let model = Self {
            task,
            forest,
            features: meta.features,
            held_out: meta.held_out,
            seed: meta.seed,
        };
        let layout = model.layout();
        model.forest.ensure_layout(&layout.id())?;
        if model.forest.mode() != task.mode() || model.forest.feature_dim() != layout.dim() {
            return Err(Error::Deserialize("model header disagrees with its metadata".into()));
        }
        Ok(model)
    }

    pub fn predict_rows(&self, rows: &[Vec<T>]) -> Result<Vec<T>> {
        rows.iter().map(|r| self.forest.predict(r)).collect()
    }
}

/// Analyzes every non-held-out sequence and trains the task's forest.
pub fn train_task<T: Real, S: FrameSource<T> + ?Sized>(
    source: &S,
    task: Task,
    held_out: Option<&str>,
    cfg: &TaskConfig,
) -> Result<TaskModel<T>> {
    let ids = source.sequence_ids();
    if let Some(h) = held_out {
        if !ids.iter().any(|i| i == h) {
            return contract(format!("held-out sequence '{}' is not in the dataset", h));
        }
    }
    let mut analyses = Vec::new();
    for id in ids.iter().filter(|i| Some(i.as_str()) != held_out) {
        let records = source.load_sequence(id)?;
        analyses.push(analyze_sequence(id, records, &cfg.features, task.uses_gaze(), |r| {
            task.has_labels(r)
        })?);
    }
    train_from_analyses(&analyses, task, held_out, cfg)
}

/// Trains from pre-analyzed sequences, skipping `held_out`.
pub fn train_from_analyses<T: Real>(
    analyses: &[SequenceAnalysis<T>],
    task: Task,
    held_out: Option<&str>,
    cfg: &TaskConfig,
) -> Result<TaskModel<T>> {
    let layout = cfg.features.layout(task.uses_gaze());
    // (sequence, frame, region, target)
    let mut pool: Vec<(usize, usize, usize, T)> = Vec::new();
    for (s, seq) in analyses.iter().enumerate() {
        if Some(seq.id.as_str()) == held_out {
            continue;
        }
        for (f, fa) in seq.frames.iter().enumerate() {
            let rec = &fa.record;
            let Some(gt) = task.target(rec) else { continue };
            if task.uses_gaze() && fa.gaze.is_none() {
                return contract(format!("sequence '{}' was analyzed without gaze history", seq.id));
            }
            for (r, region) in fa.regions.regions.iter().enumerate() {
                let iou = gt.iou(region)?;
                match task {
                    Task::Interaction => {
                        if iou >= cfg.interaction_iou {
                            let label = match rec.interaction {
                                Some(Interaction::Touch) => T::one(),
                                Some(Interaction::Sight) => T::zero(),
                                None => continue,
                            };
                            pool.push((s, f, r, label));
                        }
                    }
                    _ => pool.push((s, f, r, T::lit(iou))),
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    if pool.len() > cfg.region_budget {
        let mut keep = sample(&mut rng, pool.len(), cfg.region_budget).into_vec();
        keep.sort_unstable();
        pool = keep.into_iter().map(|i| pool[i]).collect();
    }
    if task.mode() == Mode::Regression {
        let targets: Vec<T> = pool.iter().map(|e| e.3).collect();
        let pick = balanced_sample(&targets, cfg.seed ^ 0x5eed_ba1a_0ce0_0001);
        pool = pick.into_iter().map(|i| pool[i]).collect();
    }
    if pool.is_empty() {
        return Err(Error::Training(format!(
            "no eligible training regions for task {}",
            task
        )));
    }

    // Rows are built frame by frame, then restored to pool order.
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by_key(|&i| (pool[i].0, pool[i].1, pool[i].2));
    let mut x: Vec<Vec<T>> = vec![Vec::new(); pool.len()];
    let mut start = 0;
    while start < order.len() {
        let (s, f) = (pool[order[start]].0, pool[order[start]].1);
        let mut end = start;
        while end < order.len() && (pool[order[end]].0, pool[order[end]].1) == (s, f) {
            end += 1;
        }
        let select: Vec<usize> = order[start..end].iter().map(|&i| pool[i].2).collect();
        let rows = analyses[s].frames[f].rows(&layout, &select)?;
        for (&i, row) in order[start..end].iter().zip(rows) {
            x[i] = row;
        }
        start = end;
    }
    let y: Vec<T> = pool.iter().map(|e| e.3).collect();

    let forest_cfg = TrainConfig {
        seed: cfg.seed,
        ..cfg.forest.clone()
    };
    let meta = ModelMeta {
        task: task.to_string(),
        features: cfg.features.clone(),
        held_out: held_out.map(str::to_string),
        seed: cfg.seed,
    };
    let forest = Forest::train(&x, &y, &forest_cfg, task.mode())?
        .with_layout(layout.id(), serde_json::to_string(&meta).expect("metadata serializes"));
    log::info!("trained {} on {} regions ({} features)", task, x.len(), layout.dim());
    Ok(TaskModel {
        task,
        forest,
        features: cfg.features.clone(),
        held_out: held_out.map(str::to_string),
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_names_round_trip() {
        for t in [
            Task::Saliency,
            Task::Future(2),
            Task::Future(4),
            Task::Future(6),
            Task::Interaction,
        ] {
            assert_eq!(t.to_string().parse::<Task>().unwrap(), t);
        }
        assert!("future3".parse::<Task>().is_err());
        assert!("depth".parse::<Task>().is_err());
    }
}
