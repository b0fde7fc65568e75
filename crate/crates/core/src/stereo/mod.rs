//! Dense disparity from a rectified stereo pair: per-scanline dynamic
//! programming over a truncated-SAD cost space, refined coarse to fine.

mod cost;
mod dp;
mod pyramid;

pub use cost::{matching_cost, scanline_costs, CostParams, CostVolume};
pub use dp::{fill_occlusions, scanline_dp, scanline_dp_banded};
pub use pyramid::{coarse_to_fine, disparity_to_depth, DisparityMap, StereoParams};
