//! Task orchestration: per-frame analysis, leave-one-sequence-out training,
//! saliency maps, interaction voting and evaluation.

mod analysis;
mod eval;
mod interact;
mod layout;
mod source;
mod train;

pub use analysis::{
    aggregate_max, analyze_sequence, extract_frame_features, frame_steps, gaze_history, FrameAnalysis, FrameRegions,
    SequenceAnalysis,
};
pub use eval::{
    analyze_source, cross_validate, evaluate_interaction, evaluate_maps, uniform_baseline, InteractionScore,
    SequenceScore,
};
pub use interact::{classify_interaction, majority_vote, ranking, region_mean_depth, DepthThreshold, TOP_REGIONS};
pub use layout::{FeatureConfig, FeatureLayout};
pub use source::FrameSource;
pub use train::{train_from_analyses, train_task, Task, TaskConfig, TaskModel};

use crate::raster::Grid;

/// Per-pixel saliency in `[0, 1]`.
pub type SaliencyMap<T> = Grid<T>;
