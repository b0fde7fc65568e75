use crate::data::RegionMask;
use crate::error::{contract, Result};
use crate::num::Real;

use super::homography::Homography;

pub const GAZE_HISTORY: usize = 5;
pub const GAZE_DIM: usize = GAZE_HISTORY;

/// Distances, normalized by the image diagonal, from the region centroid to
/// the image center of each of the previous five frames mapped into the
/// current one. `homographies[k - 1]` maps frame `t - k` into frame `t`.
pub fn gaze_features<T: Real>(region: &RegionMask, homographies: &[Homography]) -> Result<Vec<T>> {
    if homographies.len() != GAZE_HISTORY {
        return contract(format!(
            "expected {} homographies, got {}",
            GAZE_HISTORY,
            homographies.len()
        ));
    }
    let (w, h) = region.dims();
    let diag = ((w * w + h * h) as f64).sqrt();
    let center = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (cy, cx) = region.centroid();
    homographies
        .iter()
        .map(|hm| {
            let (x, y) = hm.apply(center.0, center.1)?;
            Ok(T::lit((x - cx).hypot(y - cy) / diag))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_history_is_static_center_distance() {
        let centered = RegionMask::rect(9, 9, 3, 3, 5, 5).unwrap();
        let ids = [Homography::identity(); 5];
        assert_eq!(gaze_features::<f64>(&centered, &ids).unwrap(), vec![0.0; 5]);
        let corner = RegionMask::rect(9, 9, 0, 0, 0, 0).unwrap();
        let d = gaze_features::<f64>(&corner, &ids).unwrap();
        let expect = (32.0f64).sqrt() / (162.0f64).sqrt();
        assert!(d.iter().all(|v| (v - expect).abs() < 1e-12));
    }

    #[test]
    fn translation_moves_mapped_center() {
        let region = RegionMask::rect(21, 11, 5, 10, 5, 10).unwrap();
        let hs: Vec<Homography> = (1..=5).map(|k| Homography::translation(-(k as f64), 0.0)).collect();
        let d = gaze_features::<f64>(&region, &hs).unwrap();
        let diag = (21.0f64 * 21.0 + 11.0 * 11.0).sqrt();
        for k in 1..=5 {
            assert!((d[k - 1] - k as f64 / diag).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_history_length() {
        let region = RegionMask::rect(9, 9, 3, 3, 5, 5).unwrap();
        assert!(gaze_features::<f64>(&region, &[Homography::identity(); 4]).is_err());
    }
}
