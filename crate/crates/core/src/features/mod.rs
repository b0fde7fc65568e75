//! Per-region EgoObject descriptors: shape, location, size and depth, plus
//! the gaze distances used for future saliency.

mod depth;
mod gaze;
mod homography;
mod layout;
mod location;
mod shape;

pub use depth::{depth_features, DEPTH_DIM};
pub use gaze::{gaze_features, GAZE_DIM, GAZE_HISTORY};
pub use homography::{
    block_correspondences, estimate_homography, ransac_homography, BlockMatchParams, Correspondence, Homography,
    RansacParams,
};
pub use layout::{base_feature_names, FeatureGroup, BASE_DIM, BASE_LAYOUT_ID};
pub use location::{location_features, size_features, LOCATION_DIM, SIZE_DIM};
pub use shape::{shape_features, shape_features_with_bounds, Moments, SHAPE_DIM};

use crate::data::RegionMask;
use crate::error::{contract, Result};
use crate::num::Real;
use crate::proposals::{ucm_bounds, ContourMap, MergeTree};
use crate::raster::Grid;

/// Base descriptor of one region in the fixed 77-entry layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    values: Vec<T>,
    depth_valid: bool,
}

impl<T: Real> FeatureVector<T> {
    pub fn from_values(values: Vec<T>, depth_valid: bool) -> Result<Self> {
        if values.len() != BASE_DIM {
            return contract(format!(
                "feature vector has {} entries, expected {}",
                values.len(),
                BASE_DIM
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return contract("feature vector contains non-finite values");
        }
        Ok(Self { values, depth_valid })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn layout_id(&self) -> &'static str {
        BASE_LAYOUT_ID
    }

    /// False when the region had no valid depth pixel and the depth block is zero.
    pub fn depth_valid(&self) -> bool {
        self.depth_valid
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

/// Computes the 77-entry base vector of `region`.
pub fn base_features<T: Real>(
    region: &RegionMask,
    contour: &ContourMap<T>,
    tree: &MergeTree<T>,
    depth: &Grid<T>,
) -> Result<FeatureVector<T>> {
    let bounds = ucm_bounds(region, tree)?;
    base_features_with_bounds(region, contour, bounds, depth)
}

/// As [`base_features`], with the merge-tree thresholds already known.
pub fn base_features_with_bounds<T: Real>(
    region: &RegionMask,
    contour: &ContourMap<T>,
    ucm: (T, T),
    depth: &Grid<T>,
) -> Result<FeatureVector<T>> {
    let mut values = Vec::with_capacity(BASE_DIM);
    values.extend(shape_features_with_bounds(region, contour, ucm)?);
    values.extend(location_features::<T>(region));
    values.extend(size_features::<T>(region));
    let (d, valid) = depth_features(region, depth)?;
    values.extend(d);
    FeatureVector::from_values(values, valid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proposals::Merge;

    fn single_leaf_tree(w: usize, h: usize) -> MergeTree<f64> {
        MergeTree::from_parts(Grid::filled(w, h, 0u32), Vec::<Merge<f64>>::new()).unwrap()
    }

    #[test]
    fn length_and_finiteness() {
        let (w, h) = (40, 30);
        let contour = ContourMap {
            strength: Grid::from_fn(w, h, |r, c| ((r * 7 + c * 3) % 11) as f64 / 10.0),
        };
        let depth = Grid::from_fn(w, h, |r, c| {
            if (r + c) % 5 == 0 {
                f64::NAN
            } else {
                1.0 + r as f64 * 0.05
            }
        });
        let region = RegionMask::from_predicate(w, h, |r, c| {
            (r as f64 - 12.0).powi(2) + (c as f64 - 20.0).powi(2) < 40.0
        })
        .unwrap();
        let f = base_features(&region, &contour, &single_leaf_tree(w, h), &depth).unwrap();
        assert_eq!(f.values().len(), 77);
        assert!(f.values().iter().all(|v| v.is_finite()));
        assert!(f.depth_valid());
        let g = base_features(&region, &contour, &single_leaf_tree(w, h), &depth).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn translation_changes_only_location_entries() {
        let (w, h) = (60, 50);
        let contour = ContourMap {
            strength: Grid::filled(w, h, 0.0),
        };
        let depth = Grid::filled(w, h, 1.7);
        let tree = single_leaf_tree(w, h);
        let region =
            RegionMask::from_predicate(w, h, |r, c| (5..14).contains(&r) && (8..20).contains(&c) && r + c > 16)
                .unwrap();
        let moved = region.translated(10, 10).unwrap();
        let a = base_features(&region, &contour, &tree, &depth).unwrap();
        let b = base_features(&moved, &contour, &tree, &depth).unwrap();
        for i in 0..77 {
            let same = (a.values()[i] - b.values()[i]).abs() < 1e-9;
            assert_eq!(same, !(11..=26).contains(&i), "index {}", i);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(FeatureVector::from_values(vec![0.0f64; 76], true).is_err());
        let mut v = vec![0.0f64; 77];
        v[3] = f64::NAN;
        assert!(FeatureVector::from_values(v, true).is_err());
    }
}
