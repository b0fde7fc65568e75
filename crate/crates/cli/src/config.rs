use std::path::{Path, PathBuf};

use egoprior::data::synth::DatasetConfig;
use egoprior::forest::TrainConfig;
use egoprior::pipeline::{FeatureConfig, TaskConfig};
use egoprior::stereo::{CostParams, StereoParams};
use serde::Deserialize;

pub const SEED_ENV: &str = "EGOPRIOR_SEED";

/// Defaults for every subcommand, read from a TOML file. Command-line flags
/// take precedence over anything set here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub features: FeatureConfig,
    pub forest: ForestConfig,
    pub task: TaskSection,
    pub stereo: StereoConfig,
    pub synth: SynthConfig,
    pub paths: PathsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            n_trees: t.n_trees,
            max_depth: t.max_depth,
            min_leaf: t.min_leaf,
            features_per_split: t.features_per_split,
            bootstrap: t.bootstrap,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    pub region_budget: usize,
    pub interaction_iou: f64,
}

impl Default for TaskSection {
    fn default() -> Self {
        let t = TaskConfig::default();
        Self {
            region_budget: t.region_budget,
            interaction_iou: t.interaction_iou,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StereoConfig {
    pub d_max: usize,
    pub levels: usize,
    pub window: usize,
    pub truncation: f64,
    pub occlusion_penalty: f64,
    pub smoothness_penalty: f64,
    pub search_band: usize,
    /// Focal length in pixels.
    pub focal: f64,
    pub baseline_mm: f64,
}

impl Default for StereoConfig {
    fn default() -> Self {
        let p = StereoParams::<f64>::new(64, 3);
        Self {
            d_max: p.d_max,
            levels: p.levels,
            window: p.cost.window,
            truncation: p.cost.truncation,
            occlusion_penalty: p.occlusion_penalty,
            smoothness_penalty: p.smoothness_penalty,
            search_band: p.search_band,
            focal: 525.0,
            baseline_mm: 100.0,
        }
    }
}

impl StereoConfig {
    pub fn params(&self) -> StereoParams<f64> {
        StereoParams {
            d_max: self.d_max,
            levels: self.levels,
            cost: CostParams {
                window: self.window,
                truncation: self.truncation,
            },
            occlusion_penalty: self.occlusion_penalty,
            smoothness_penalty: self.smoothness_penalty,
            search_band: self.search_band,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub sequences: usize,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub pan_speed: usize,
    pub target_spacing: usize,
    pub sight_fraction: f64,
    pub phase_length: usize,
    pub far_distractors: bool,
    pub near_distractors: bool,
    pub rgb_noise: f64,
    pub depth_noise: f64,
    pub min_range: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let d = DatasetConfig::default();
        Self {
            sequences: d.sequences,
            frames: d.frames,
            width: d.width,
            height: d.height,
            fps: d.fps,
            pan_speed: d.pan_speed,
            target_spacing: d.target_spacing,
            sight_fraction: d.sight_fraction,
            phase_length: d.phase_length,
            far_distractors: d.far_distractors,
            near_distractors: d.near_distractors,
            rgb_noise: d.rgb_noise,
            depth_noise: d.depth_noise,
            min_range: d.min_range,
        }
    }
}

impl SynthConfig {
    pub fn dataset(&self) -> DatasetConfig {
        DatasetConfig {
            sequences: self.sequences,
            frames: self.frames,
            width: self.width,
            height: self.height,
            fps: self.fps,
            pan_speed: self.pan_speed,
            target_spacing: self.target_spacing,
            sight_fraction: self.sight_fraction,
            phase_length: self.phase_length,
            far_distractors: self.far_distractors,
            near_distractors: self.near_distractors,
            rgb_noise: self.rgb_noise,
            depth_noise: self.depth_noise,
            min_range: self.min_range,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {}", path.display(), e))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {}", path.display(), e.message()))
    }

    /// Flag, then config file, then `EGOPRIOR_SEED`, then 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, String> {
        if let Some(s) = flag.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("{} must be an unsigned integer, got '{}'", SEED_ENV, v)),
            Err(_) => Ok(0),
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            n_trees: self.forest.n_trees,
            max_depth: self.forest.max_depth,
            min_leaf: self.forest.min_leaf,
            features_per_split: self.forest.features_per_split,
            bootstrap: self.forest.bootstrap,
            seed,
        }
    }

    pub fn task_config(&self, seed: u64) -> TaskConfig {
        TaskConfig {
            features: self.features.clone(),
            forest: self.train_config(seed),
            region_budget: self.task.region_budget,
            interaction_iou: self.task.interaction_iou,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: RunConfig = toml::from_str("").unwrap();
        assert_eq!(c.features, FeatureConfig::default());
        assert_eq!(c.forest.n_trees, TrainConfig::default().n_trees);
        assert_eq!(c.stereo.params(), StereoParams::new(64, 3));
        assert_eq!(c.synth.dataset(), DatasetConfig::default());
    }

    #[test]
    fn nested_sections_parse() {
        let c: RunConfig = toml::from_str(
            "seed = 9\n[features.context]\nn_neighbors = 8\nknn = 2\n[forest]\nn_trees = 7\n[stereo]\nd_max = 16\n",
        )
        .unwrap();
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.features.context.knn, 2);
        assert_eq!(c.forest.n_trees, 7);
        assert_eq!(c.stereo.d_max, 16);
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn flag_beats_file() {
        let c = RunConfig {
            seed: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(c.resolve_seed(Some(5)).unwrap(), 5);
        assert_eq!(c.resolve_seed(None).unwrap(), 3);
    }
}
