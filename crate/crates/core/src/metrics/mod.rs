//! Saliency and interaction evaluation: pooled precision-recall, Max
//! F-score, Average Precision and per-sequence report tables.

mod pr;
mod report;

pub use pr::{
    average_precision, frame_confusion, interaction_accuracy, max_f_score, pr_curve, pr_curve_exact, threshold_count,
    Confusion, PrAccumulator, PrCurve, PrPoint, N_THRESHOLDS,
};
pub use report::{EvalReport, MethodRow};
