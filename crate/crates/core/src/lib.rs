pub mod context;
pub mod data;
pub mod error;
pub mod features;
pub mod forest;
pub mod metrics;
pub mod num;
pub mod pipeline;
pub mod proposals;
pub mod raster;
pub mod stereo;

pub use error::{Error, Result};
pub use num::Real;

// Double-precision instantiations of the generic types.
pub type Frame64 = data::RgbdFrame<f64>;
pub type FrameRecord64 = data::FrameRecord<f64>;
pub type ContourMap64 = proposals::ContourMap<f64>;
pub type MergeTree64 = proposals::MergeTree<f64>;
pub type FeatureVector64 = features::FeatureVector<f64>;
pub type Forest64 = forest::Forest<f64>;
pub type TaskModel64 = pipeline::TaskModel<f64>;
pub type SaliencyMap64 = pipeline::SaliencyMap<f64>;
pub type StereoParams64 = stereo::StereoParams<f64>;
